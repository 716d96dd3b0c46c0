#ifndef NERREP_EVAL_H_
#define NERREP_EVAL_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/packer.h"

namespace nerrep {

// An annotation located in a corpus: (document, sentence, start, end, category).
struct SpanKey {
  std::string doc_id;
  int sentence = 0;
  int start = 0;
  int end = 0;
  std::string category;

  auto operator<=>(const SpanKey&) const = default;
};

struct EvalReport {
  int64_t true_positives = 0;
  int64_t false_positives = 0;
  int64_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged strict matching: a prediction counts only when an unmatched
// gold span has the same document, sentence, boundaries and category.
// Matching is one-to-one; both inputs are multisets.
EvalReport StrictSpanF1(const std::vector<SpanKey>& gold,
                        const std::vector<SpanKey>& predicted);

std::vector<SpanKey> CollectSpans(const Dataset& dataset);

// Scores predicted against gold; documents are matched by doc_id.
EvalReport EvaluateDatasets(const Dataset& gold, const Dataset& predicted);

struct RunAggregate {
  std::vector<double> values;
  double mean = 0.0;
  double sigma = 0.0;  // population standard deviation
};

// Sums in sorted order, so the result does not depend on run order.
// Throws Error on an empty list.
RunAggregate AggregateRuns(const std::vector<double>& values);

// Rows: training strategies. Columns: inference strategies.
struct CrossMatrix {
  std::vector<Strategy> train_strategies;
  std::vector<Strategy> infer_strategies;
  std::vector<uint64_t> seeds;
  std::vector<std::vector<RunAggregate>> cells;  // [row][column], runs in seed order

  // Arithmetic mean of the column means of one row.
  double RowAverage(size_t row) const;
  const RunAggregate& Cell(Strategy train, Strategy infer) const;
  size_t RowIndex(Strategy train) const;
};

// Trains one model for (training strategy, seed) and returns a predictor that
// labels a dataset under a given inference strategy.
using Predictor = std::function<Dataset(const Dataset&, Strategy)>;
using TrainFunction = std::function<Predictor(Strategy, uint64_t seed)>;

// Called after each trained model has been evaluated.
using CellCallback =
    std::function<void(Strategy train, uint64_t seed, Strategy infer, double f1)>;

CrossMatrix RunCrossMatrix(const TrainFunction& train, const Dataset& eval_corpus,
                           const std::vector<Strategy>& train_strategies,
                           const std::vector<Strategy>& infer_strategies,
                           const std::vector<uint64_t>& seeds,
                           const CellCallback& on_cell = nullptr);

// One line per (training, inference) cell with mean, sigma and row average.
void WriteCrossMatrixCsv(const CrossMatrix& matrix, std::ostream& out);
// Aligned text table: rows per training strategy, F1 and sigma per
// inference strategy, then AVG. Values in percent.
void WriteCrossMatrixTable(const CrossMatrix& matrix, std::ostream& out);

}  // namespace nerrep

#endif  // NERREP_EVAL_H_
