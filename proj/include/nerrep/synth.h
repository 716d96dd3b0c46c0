#ifndef NERREP_SYNTH_H_
#define NERREP_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/packer.h"
#include "nerrep/tokenizer.h"

namespace nerrep {

enum class CueSide { kLeft, kRight };

struct SynthConfig {
  int n_docs = 200;
  int sentences_per_doc = 12;
  int vocab_size = 60;               // filler words
  int ambiguous_entity_count = 8;    // surface forms shared by categories
  int unambiguous_per_category = 8;  // surface forms owned by one category
  int category_count = 2;            // 2..4 flat categories
  // Sentences between cue and target; when cue_distance_max exceeds
  // cue_distance each episode draws a distance from the closed range.
  int cue_distance = 1;
  int cue_distance_max = 0;
  double context_dependence_rate = 0.7;
  // Probability that an ambiguous mention takes its form's preferred
  // category. Negative means uniform over categories.
  double ambiguous_bias = -1.0;
  CueSide cue_side = CueSide::kLeft;
  uint64_t seed = 0;

  int max_distance() const { return std::max(cue_distance, cue_distance_max); }
  void Validate() const;
};

struct SynthMention {
  int document = 0;
  int sentence = 0;
  int start = 0;
  int end = 0;
  std::string category;
  std::string form;  // surface text, space-joined
  bool context_dependent = false;
  int cue_sentence = 0;
};

struct SynthCorpus {
  Dataset dataset;
  std::vector<SynthMention> mentions;
  std::vector<std::vector<std::string>> cue_words;  // per category index
  std::vector<std::string> categories;
};

// Documents are sequences of episodes: a cue sentence whose cue word fixes a
// category, fillers, then a target sentence holding one mention of that
// category. Context-dependent mentions use a surface form shared by all
// categories; the rest use a form owned by their category.
SynthCorpus GenerateSynthCorpus(const SynthConfig& config);

struct BayesBound {
  double all_mentions = 1.0;
  double ambiguous_mentions = 1.0;  // 1.0 when there are none
  int evidence_classes = 0;
};

// Best mention-categorization accuracy for a labeler that sees only the
// text of the window classifying each mention: mentions are grouped by
// (surface form, nearest visible cue word on each side) and every group is
// labelled with its majority category. Strategy must not be union.
BayesBound ComputeBayesBound(const SynthCorpus& corpus, const PackerConfig& packer,
                             const SubwordVocabulary& vocab);

}  // namespace nerrep

#endif  // NERREP_SYNTH_H_
