#ifndef NERREP_PACKER_H_
#define NERREP_PACKER_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/labelcodec.h"
#include "nerrep/tokenizer.h"

namespace nerrep {

enum class Strategy { kSingle, kMerged, kContext, kUnion };

std::string_view StrategyName(Strategy strategy);
Strategy ParseStrategy(std::string_view name);

inline constexpr Strategy kInferenceStrategies[] = {
    Strategy::kSingle, Strategy::kMerged, Strategy::kContext};

struct PackerConfig {
  int max_len = 256;
  // Share of the capacity left after the target fragment that may be filled
  // with context, in (0, 1].
  double context_budget_fraction = 1.0;
  Strategy strategy = Strategy::kSingle;

  // Content positions per window; one BOS and one EOS are reserved.
  int capacity() const { return max_len - 2; }
  void Validate() const;
};

inline constexpr int kIgnoreLabel = -100;

struct WordRef {
  std::string doc_id;
  int sentence = 0;
  int word = 0;

  bool operator==(const WordRef&) const = default;
};

// One fixed-length model input.
struct EncodedWindow {
  std::vector<int> subtoken_ids;
  std::vector<uint8_t> attention_mask;
  std::vector<uint8_t> classifier_mask;
  std::vector<int> label_ids;         // kIgnoreLabel off the classifier mask
  std::vector<WordRef> provenance;    // one per classifier-active position
  Strategy strategy = Strategy::kSingle;

  int max_len() const { return static_cast<int>(subtoken_ids.size()); }
  int active_count() const { return static_cast<int>(provenance.size()); }

  bool operator==(const EncodedWindow&) const = default;
};

// A document flattened into one subtoken stream with word labels attached.
struct PreparedDocument {
  std::string doc_id;
  std::vector<int> ids;
  std::vector<int> sentence_of;   // per stream position
  std::vector<int> word_of;       // per stream position
  std::vector<uint8_t> first;     // per stream position
  std::vector<int> sentence_begin;  // stream offsets, size = sentences + 1
  std::vector<std::vector<int>> word_labels;  // [sentence][word] label id

  int length() const { return static_cast<int>(ids.size()); }
  int sentence_count() const {
    return static_cast<int>(sentence_begin.size()) - 1;
  }
};

// Tokenizes and label-encodes a document. Composite labels missing from the
// label vocabulary map to "O".
PreparedDocument PrepareDocument(const Document& document,
                                 const SubwordVocabulary& vocab,
                                 const LabelVocabulary& labels,
                                 int max_depth = kDefaultMaxDepth);

// A window as two stream ranges: the visible content and, inside it, the
// target range whose first subtokens are classified.
struct WindowPlan {
  Strategy strategy = Strategy::kSingle;
  int visible_begin = 0, visible_end = 0;
  int target_begin = 0, target_end = 0;

  bool operator==(const WindowPlan&) const = default;
};

// Consecutive non-overlapping chunks of one sentence, each at most
// `capacity` subtokens. Words are kept whole unless a word alone exceeds the
// capacity.
std::vector<std::pair<int, int>> ChunkSentence(const PreparedDocument& doc,
                                               int sentence, int capacity);

std::vector<WindowPlan> PlanSingle(const PreparedDocument& doc,
                                   const PackerConfig& config);
std::vector<WindowPlan> PlanMerged(const PreparedDocument& doc,
                                   const PackerConfig& config);
std::vector<WindowPlan> PlanContext(const PreparedDocument& doc,
                                    const PackerConfig& config);
// Dispatches on config.strategy; union yields single, merged, context plans.
std::vector<WindowPlan> PlanWindows(const PreparedDocument& doc,
                                    const PackerConfig& config);

EncodedWindow MaterializeWindow(const PreparedDocument& doc,
                                const WindowPlan& plan, int max_len,
                                const SubwordVocabulary& vocab);

std::vector<EncodedWindow> PackSingle(const PreparedDocument& doc,
                                      const PackerConfig& config,
                                      const SubwordVocabulary& vocab);
std::vector<EncodedWindow> PackMerged(const PreparedDocument& doc,
                                      const PackerConfig& config,
                                      const SubwordVocabulary& vocab);
std::vector<EncodedWindow> PackContext(const PreparedDocument& doc,
                                       const PackerConfig& config,
                                       const SubwordVocabulary& vocab);
std::vector<EncodedWindow> PackUnion(const PreparedDocument& doc,
                                     const PackerConfig& config,
                                     const SubwordVocabulary& vocab);

// Packs with config.strategy.
std::vector<EncodedWindow> PackDocument(const Document& document,
                                        const PackerConfig& config,
                                        const SubwordVocabulary& vocab,
                                        const LabelVocabulary& labels);

// Packs every document in order.
std::vector<EncodedWindow> PackDataset(const Dataset& dataset,
                                       const PackerConfig& config,
                                       const SubwordVocabulary& vocab,
                                       const LabelVocabulary& labels);

struct CoverageViolation {
  int sentence = 0;
  int word = 0;
  int count = 0;

  bool operator==(const CoverageViolation&) const = default;
};

struct CoverageReport {
  std::vector<CoverageViolation> violations;
  // Provenance entries naming another document or a word that does not exist.
  int foreign_entries = 0;

  bool ok() const { return violations.empty() && foreign_entries == 0; }
};

// Checks that every word of the document is classifier-active exactly
// `expected_multiplicity` times across the windows.
CoverageReport CheckCoverage(const std::vector<EncodedWindow>& windows,
                             const Document& document,
                             int expected_multiplicity);

// Window file: one JSON object per line.
void WriteWindows(const std::vector<EncodedWindow>& windows, std::ostream& out);
std::vector<EncodedWindow> ReadWindows(std::istream& in);

}  // namespace nerrep

#endif  // NERREP_PACKER_H_
