#include "nerrep/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace nerrep {

EvalReport StrictSpanF1(const std::vector<SpanKey>& gold,
                        const std::vector<SpanKey>& predicted) {
  std::map<SpanKey, int64_t> unmatched;
  for (const auto& g : gold) ++unmatched[g];
  EvalReport r;
  for (const auto& p : predicted) {
    auto it = unmatched.find(p);
    if (it != unmatched.end() && it->second > 0) {
      --it->second;
      ++r.true_positives;
    } else {
      ++r.false_positives;
    }
  }
  r.false_negatives = static_cast<int64_t>(gold.size()) - r.true_positives;
  const auto ratio = [](int64_t a, int64_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  r.precision = ratio(r.true_positives, r.true_positives + r.false_positives);
  r.recall = ratio(r.true_positives, r.true_positives + r.false_negatives);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::vector<SpanKey> CollectSpans(const Dataset& dataset) {
  std::vector<SpanKey> spans;
  for (const auto& doc : dataset.documents) {
    for (const auto& sentence : doc.sentences) {
      for (const auto& a : sentence.annotations) {
        spans.push_back(
            {doc.doc_id, sentence.sent_index, a.start, a.end, a.category});
      }
    }
  }
  return spans;
}

EvalReport EvaluateDatasets(const Dataset& gold, const Dataset& predicted) {
  return StrictSpanF1(CollectSpans(gold), CollectSpans(predicted));
}

RunAggregate AggregateRuns(const std::vector<double>& values) {
  if (values.empty()) throw Error("cannot aggregate an empty run list");
  RunAggregate agg;
  agg.values = values;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const auto n = static_cast<double>(sorted.size());
  agg.mean = sum / n;
  double squares = 0.0;
  for (double v : sorted) squares += (v - agg.mean) * (v - agg.mean);
  agg.sigma = std::sqrt(squares / n);
  return agg;
}

double CrossMatrix::RowAverage(size_t row) const {
  double sum = 0.0;
  for (const auto& cell : cells.at(row)) sum += cell.mean;
  return sum / static_cast<double>(cells[row].size());
}

size_t CrossMatrix::RowIndex(Strategy train) const {
  for (size_t i = 0; i < train_strategies.size(); ++i) {
    if (train_strategies[i] == train) return i;
  }
  throw Error("training strategy not in matrix");
}

const RunAggregate& CrossMatrix::Cell(Strategy train, Strategy infer) const {
  const size_t row = RowIndex(train);
  for (size_t c = 0; c < infer_strategies.size(); ++c) {
    if (infer_strategies[c] == infer) return cells[row][c];
  }
  throw Error("inference strategy not in matrix");
}

CrossMatrix RunCrossMatrix(const TrainFunction& train, const Dataset& eval_corpus,
                           const std::vector<Strategy>& train_strategies,
                           const std::vector<Strategy>& infer_strategies,
                           const std::vector<uint64_t>& seeds,
                           const CellCallback& on_cell) {
  if (seeds.empty()) throw Error("at least one run is required");
  if (std::set<uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw Error("seeds must be distinct");
  }
  for (Strategy s : infer_strategies) {
    if (s == Strategy::kUnion) throw Error("union is not an inference strategy");
  }
  CrossMatrix matrix;
  matrix.train_strategies = train_strategies;
  matrix.infer_strategies = infer_strategies;
  matrix.seeds = seeds;
  for (Strategy train_strategy : train_strategies) {
    std::vector<std::vector<double>> runs(infer_strategies.size());
    for (uint64_t seed : seeds) {
      const Predictor predict = train(train_strategy, seed);
      for (size_t c = 0; c < infer_strategies.size(); ++c) {
        const Dataset predicted = predict(eval_corpus, infer_strategies[c]);
        const double f1 = EvaluateDatasets(eval_corpus, predicted).f1;
        runs[c].push_back(f1);
        if (on_cell) on_cell(train_strategy, seed, infer_strategies[c], f1);
      }
    }
    std::vector<RunAggregate> row;
    for (const auto& r : runs) row.push_back(AggregateRuns(r));
    matrix.cells.push_back(std::move(row));
  }
  return matrix;
}

void WriteCrossMatrixCsv(const CrossMatrix& matrix, std::ostream& out) {
  out << "train,infer,runs,f1_mean,f1_sigma,row_avg,f1_runs\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (size_t r = 0; r < matrix.train_strategies.size(); ++r) {
    for (size_t c = 0; c < matrix.infer_strategies.size(); ++c) {
      const RunAggregate& cell = matrix.cells[r][c];
      out << StrategyName(matrix.train_strategies[r]) << ','
          << StrategyName(matrix.infer_strategies[c]) << ','
          << cell.values.size() << ',' << fmt(cell.mean) << ','
          << fmt(cell.sigma) << ',' << fmt(matrix.RowAverage(r)) << ',';
      for (size_t i = 0; i < cell.values.size(); ++i) {
        out << (i ? ";" : "") << fmt(cell.values[i]);
      }
      out << '\n';
    }
  }
}

void WriteCrossMatrixTable(const CrossMatrix& matrix, std::ostream& out) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s", "Training");
  out << buf;
  for (Strategy s : matrix.infer_strategies) {
    std::snprintf(buf, sizeof buf, " | %8s %6s", std::string(StrategyName(s)).c_str(),
                  "sigma");
    out << buf;
  }
  out << " | " << "   AVG\n";
  const size_t width = 10 + matrix.infer_strategies.size() * 18 + 9;
  out << std::string(width, '-') << '\n';
  for (size_t r = 0; r < matrix.train_strategies.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%-10s",
                  std::string(StrategyName(matrix.train_strategies[r])).c_str());
    out << buf;
    for (const auto& cell : matrix.cells[r]) {
      std::snprintf(buf, sizeof buf, " | %8.2f %6.2f", 100.0 * cell.mean,
                    100.0 * cell.sigma);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " | %6.2f\n", 100.0 * matrix.RowAverage(r));
    out << buf;
  }
}

}  // namespace nerrep
