#ifndef NERREP_TESTS_ORACLES_H_
#define NERREP_TESTS_ORACLES_H_

// Independent reference computations used to cross-check library results.

#include <cmath>
#include <functional>
#include <vector>

#include "nerrep/eval.h"
#include "nerrep/random.h"

namespace nerrep::testing {

// Maximum bipartite matching (augmenting paths) between gold and predicted
// spans where an edge means exact equality.
inline int MaxMatchingOracle(const std::vector<SpanKey>& gold,
                             const std::vector<SpanKey>& pred) {
  std::vector<int> owner(gold.size(), -1);
  std::function<bool(size_t, std::vector<bool>&)> augment =
      [&](size_t p, std::vector<bool>& seen) {
        for (size_t g = 0; g < gold.size(); ++g) {
          if (seen[g] || !(gold[g] == pred[p])) continue;
          seen[g] = true;
          if (owner[g] < 0 || augment(owner[g], seen)) {
            owner[g] = static_cast<int>(p);
            return true;
          }
        }
        return false;
      };
  int matched = 0;
  for (size_t p = 0; p < pred.size(); ++p) {
    std::vector<bool> seen(gold.size(), false);
    if (augment(p, seen)) ++matched;
  }
  return matched;
}

struct MeanSigma {
  double mean;
  double sigma;
};

// Two-pass population statistics in long double.
inline MeanSigma MeanSigmaOracle(const std::vector<double>& v) {
  long double sum = 0;
  for (double x : v) sum += x;
  const long double mean = sum / v.size();
  long double sq = 0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {static_cast<double>(mean),
          static_cast<double>(std::sqrt(sq / v.size()))};
}

// Up to `max_spans` spans from a small universe so collisions are common.
inline std::vector<SpanKey> RandomSpanKeys(Random& rng, int max_spans) {
  static const std::vector<std::string> kDocs = {"a", "b"};
  static const std::vector<std::string> kCats = {"PER", "LOC", "ORG"};
  std::vector<SpanKey> out;
  const int n = static_cast<int>(rng.Below(max_spans + 1));
  for (int i = 0; i < n; ++i) {
    SpanKey k;
    k.doc_id = rng.Pick(kDocs);
    k.sentence = static_cast<int>(rng.Below(2));
    k.start = static_cast<int>(rng.Below(3));
    k.end = k.start + 1 + static_cast<int>(rng.Below(2));
    k.category = rng.Pick(kCats);
    out.push_back(k);
  }
  return out;
}

}  // namespace nerrep::testing

#endif  // NERREP_TESTS_ORACLES_H_
