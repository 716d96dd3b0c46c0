#ifndef NERREP_TESTS_TEST_UTIL_H_
#define NERREP_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/random.h"

namespace nerrep::testing {

inline Sentence MakeSentence(const std::vector<std::string>& words,
                             std::vector<Annotation> annotations = {}) {
  Sentence s;
  for (size_t i = 0; i < words.size(); ++i) {
    s.tokens.push_back({words[i], static_cast<int>(i)});
  }
  s.annotations = std::move(annotations);
  return s;
}

// Random laminar (properly nested) span set with depth <= max_depth and no
// duplicate (category, span).
inline std::vector<Annotation> RandomNestedSpans(Random& rng, int length,
                                                 int max_depth,
                                                 const std::vector<std::string>& cats) {
  std::vector<Annotation> out;
  // Recursively fill [lo, hi) at the given depth.
  struct Filler {
    Random& rng;
    const std::vector<std::string>& cats;
    int max_depth;
    std::vector<Annotation>& out;
    void Fill(int lo, int hi, int depth, const Annotation* parent) {
      if (depth >= max_depth || hi <= lo) return;
      int pos = lo;
      while (pos < hi) {
        if (!rng.Bernoulli(0.45)) {
          ++pos;
          continue;
        }
        const int end = pos + 1 + static_cast<int>(rng.Below(hi - pos));
        Annotation a{rng.Pick(cats), pos, end};
        if (parent && *parent == a) {
          ++pos;
          continue;
        }
        out.push_back(a);
        Fill(pos, end, depth + 1, &a);
        pos = end;
      }
    }
  };
  Filler{rng, cats, max_depth, out}.Fill(0, length, 0, nullptr);
  NormalizeAnnotations(out);
  return out;
}

inline Document RandomDocument(Random& rng, const std::string& id,
                               int max_sentences, int max_words,
                               int max_depth = 2) {
  static const std::vector<std::string> kWords = {
      "Eiffel", "tower", "in", "Paris", "the", "qz", "Xax", "city",
      "works", "Mark", "loves", "this", "company", "a", "of", "Warsaw"};
  static const std::vector<std::string> kCats = {"PER", "LOC", "ORG", "MISC"};
  Document doc;
  doc.doc_id = id;
  const int n = static_cast<int>(rng.Below(max_sentences + 1));
  for (int s = 0; s < n; ++s) {
    const int len = 1 + static_cast<int>(rng.Below(max_words));
    std::vector<std::string> words;
    for (int w = 0; w < len; ++w) words.push_back(rng.Pick(kWords));
    Sentence sentence = MakeSentence(words);
    sentence.sent_index = s;
    sentence.annotations = RandomNestedSpans(rng, len, max_depth, kCats);
    doc.sentences.push_back(std::move(sentence));
  }
  return doc;
}

}  // namespace nerrep::testing

#endif  // NERREP_TESTS_TEST_UTIL_H_
