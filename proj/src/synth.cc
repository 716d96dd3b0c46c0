#include "nerrep/synth.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <tuple>

#include "nerrep/labelcodec.h"
#include "nerrep/random.h"

namespace nerrep {
namespace {

const char* const kCategoryNames[] = {"LOC", "ORG", "PER", "MISC"};
const char* const kCueWords[][2] = {
    {"city", "town"}, {"company", "firm"}, {"man", "woman"}, {"event", "book"}};

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                               "p", "r", "s", "t", "v", "z", "br", "st"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

// Distinct pseudo-words of two or three syllables.
std::vector<std::string> MakeWords(int count, Random& rng,
                                   std::set<std::string>& taken) {
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < count) {
    std::string w;
    const int syllables = rng.Between(2, 3);
    for (int s = 0; s < syllables; ++s) {
      w += kOnsets[rng.Below(std::size(kOnsets))];
      w += kVowels[rng.Below(std::size(kVowels))];
    }
    if (taken.insert(w).second) words.push_back(w);
  }
  return words;
}

std::string Capitalize(std::string w) {
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::vector<std::string> SplitForm(const std::string& form) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    const size_t next = form.find(' ', pos);
    parts.push_back(form.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return parts;
}

class DocumentWriter {
 public:
  DocumentWriter(const std::vector<std::string>& fillers, Random& rng)
      : fillers_(fillers), rng_(rng) {}

  Sentence Filler() {
    Sentence s;
    AddFillers(s, rng_.Between(4, 7));
    End(s);
    return s;
  }

  Sentence Cue(const std::string& cue) {
    Sentence s;
    AddFillers(s, rng_.Between(1, 3));
    s.tokens.push_back({cue, 0});
    AddFillers(s, rng_.Between(1, 3));
    End(s);
    return s;
  }

  // Returns the sentence and the mention's token span.
  Sentence Target(const std::string& form, const std::string& category,
                  int& start, int& end) {
    Sentence s;
    AddFillers(s, rng_.Between(1, 3));
    start = s.size();
    for (auto& part : SplitForm(form)) s.tokens.push_back({part, 0});
    end = s.size();
    AddFillers(s, rng_.Between(1, 3));
    End(s);
    s.annotations.push_back({category, start, end});
    return s;
  }

 private:
  void AddFillers(Sentence& s, int n) {
    for (int i = 0; i < n; ++i) s.tokens.push_back({rng_.Pick(fillers_), 0});
  }
  static void End(Sentence& s) { s.tokens.push_back({".", 0}); }

  const std::vector<std::string>& fillers_;
  Random& rng_;
};

}  // namespace

void SynthConfig::Validate() const {
  if (n_docs <= 0 || sentences_per_doc <= 0 || vocab_size <= 0 ||
      ambiguous_entity_count <= 0 || unambiguous_per_category <= 0) {
    throw Error("synthetic corpus sizes must be positive");
  }
  if (category_count < 2 || category_count > 4) {
    throw Error("category_count must lie in [2, 4]");
  }
  if (cue_distance < 1) throw Error("cue_distance must be at least 1");
  if (max_distance() >= sentences_per_doc) {
    throw Error("cue distance must be smaller than sentences_per_doc");
  }
  if (!(context_dependence_rate >= 0.0 && context_dependence_rate <= 1.0)) {
    throw Error("context_dependence_rate must lie in [0, 1]");
  }
  if (ambiguous_bias > 1.0) throw Error("ambiguous_bias must not exceed 1");
}

SynthCorpus GenerateSynthCorpus(const SynthConfig& config) {
  config.Validate();
  Random rng(config.seed);
  SynthCorpus corpus;
  const int k = config.category_count;

  std::set<std::string> taken;
  for (int c = 0; c < k; ++c) {
    corpus.categories.push_back(kCategoryNames[c]);
    corpus.cue_words.push_back({kCueWords[c][0], kCueWords[c][1]});
    taken.insert(kCueWords[c][0]);
    taken.insert(kCueWords[c][1]);
  }
  const std::vector<std::string> fillers =
      MakeWords(config.vocab_size, rng, taken);

  auto make_forms = [&](int count) {
    std::vector<std::string> forms;
    for (const auto& w : MakeWords(count, rng, taken)) {
      std::string form = Capitalize(w);
      if (rng.Bernoulli(0.3)) {
        form += " " + Capitalize(MakeWords(1, rng, taken)[0]);
      }
      forms.push_back(form);
    }
    return forms;
  };
  const std::vector<std::string> ambiguous = make_forms(config.ambiguous_entity_count);
  std::vector<std::vector<std::string>> owned;
  for (int c = 0; c < k; ++c) owned.push_back(make_forms(config.unambiguous_per_category));

  std::vector<Document> documents;
  for (int d = 0; d < config.n_docs; ++d) {
    Random doc_rng = Random::Derive(config.seed, static_cast<uint64_t>(d) + 1);
    DocumentWriter writer(fillers, doc_rng);
    const int n = config.sentences_per_doc;
    std::vector<Sentence> sentences(n);
    std::vector<bool> filled(n, false);

    int p = 0;
    while (true) {
      const int distance =
          doc_rng.Between(config.cue_distance, config.max_distance());
      if (p + distance >= n) break;
      const int cue_at = config.cue_side == CueSide::kLeft ? p : p + distance;
      const int target_at = config.cue_side == CueSide::kLeft ? p + distance : p;

      SynthMention m;
      m.document = d;
      m.sentence = target_at;
      m.cue_sentence = cue_at;
      m.context_dependent = doc_rng.Bernoulli(config.context_dependence_rate);
      int category;
      if (m.context_dependent) {
        const int form = static_cast<int>(doc_rng.Below(ambiguous.size()));
        m.form = ambiguous[form];
        const int preferred = form % k;
        if (config.ambiguous_bias < 0.0) {
          category = static_cast<int>(doc_rng.Below(k));
        } else if (doc_rng.Bernoulli(config.ambiguous_bias)) {
          category = preferred;
        } else {
          category = (preferred + 1 + static_cast<int>(doc_rng.Below(k - 1))) % k;
        }
      } else {
        category = static_cast<int>(doc_rng.Below(k));
        m.form = doc_rng.Pick(owned[category]);
      }
      m.category = corpus.categories[category];

      sentences[cue_at] = writer.Cue(doc_rng.Pick(corpus.cue_words[category]));
      sentences[target_at] = writer.Target(m.form, m.category, m.start, m.end);
      filled[cue_at] = filled[target_at] = true;
      corpus.mentions.push_back(std::move(m));
      p += distance + 1 + doc_rng.Between(0, 1);
    }
    for (int s = 0; s < n; ++s) {
      if (!filled[s]) sentences[s] = writer.Filler();
    }
    documents.push_back({"synth-" + std::to_string(d), std::move(sentences)});
  }
  corpus.dataset = Dataset::FromDocuments(std::move(documents));
  return corpus;
}

BayesBound ComputeBayesBound(const SynthCorpus& corpus, const PackerConfig& packer,
                             const SubwordVocabulary& vocab) {
  if (packer.strategy == Strategy::kUnion) {
    throw Error("the bound is defined per inference strategy");
  }
  std::map<std::string, int> cue_category;
  for (size_t c = 0; c < corpus.cue_words.size(); ++c) {
    for (const auto& w : corpus.cue_words[c]) cue_category[w] = static_cast<int>(c);
  }
  std::vector<std::vector<const SynthMention*>> by_doc(corpus.dataset.documents.size());
  for (const auto& m : corpus.mentions) by_doc[m.document].push_back(&m);

  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::map<std::string, int>> all, ambiguous;
  const LabelVocabulary no_labels;

  for (size_t d = 0; d < corpus.dataset.documents.size(); ++d) {
    if (by_doc[d].empty()) continue;
    const Document& document = corpus.dataset.documents[d];
    const PreparedDocument doc = PrepareDocument(document, vocab, no_labels);
    const auto plans = PlanWindows(doc, packer);

    // Stream offset of the first subtoken of each (sentence, word).
    auto word_begin = [&](int sentence, int word) {
      for (int i = doc.sentence_begin[sentence]; i < doc.sentence_begin[sentence + 1]; ++i) {
        if (doc.word_of[i] == word && doc.first[i]) return i;
      }
      throw Error("word without subtokens");
    };

    for (const SynthMention* m : by_doc[d]) {
      const int head = word_begin(m->sentence, m->start);
      const WindowPlan* plan = nullptr;
      for (const auto& p : plans) {
        if (head >= p.target_begin && head < p.target_end) {
          plan = &p;
          break;
        }
      }
      if (plan == nullptr) throw Error("mention not covered by any window");

      const int mention_end =
          m->end < document.sentences[m->sentence].size()
              ? word_begin(m->sentence, m->end)
              : doc.sentence_begin[m->sentence + 1];
      std::string left = "-", right = "-";
      for (int i = plan->visible_begin; i < plan->visible_end; ++i) {
        if (!doc.first[i]) continue;
        const int s = doc.sentence_of[i];
        const int w = doc.word_of[i];
        int word_end = i + 1;
        while (word_end < doc.length() && !doc.first[word_end] &&
               doc.sentence_of[word_end] == s) {
          ++word_end;
        }
        if (word_end > plan->visible_end) continue;  // partially visible
        const std::string& text = document.sentences[s].tokens[w].text;
        if (!cue_category.count(text)) continue;
        if (i < head) left = text;  // keeps the nearest
        if (i >= mention_end && right == "-") right = text;
      }
      const Key key{m->form, left, right};
      ++all[key][m->category];
      if (m->context_dependent) ++ambiguous[key][m->category];
    }
  }

  auto majority_accuracy = [](const std::map<Key, std::map<std::string, int>>& classes) {
    int correct = 0, total = 0;
    for (const auto& [key, counts] : classes) {
      int best = 0;
      for (const auto& [category, count] : counts) {
        best = std::max(best, count);
        total += count;
      }
      correct += best;
    }
    return total == 0 ? 1.0 : static_cast<double>(correct) / total;
  };
  BayesBound bound;
  bound.all_mentions = majority_accuracy(all);
  bound.ambiguous_mentions = majority_accuracy(ambiguous);
  bound.evidence_classes = static_cast<int>(all.size());
  return bound;
}

}  // namespace nerrep
