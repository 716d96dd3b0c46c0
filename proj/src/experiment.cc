#include "nerrep/experiment.h"

#include <cstdio>
#include <memory>

namespace nerrep {

ExperimentConfig DefaultExperimentConfig() {
  ExperimentConfig config;
  config.packer.max_len = 256;
  config.model.dropout = 0.2;
  config.train.epochs = 20;
  config.train.learning_rate = 1e-3;
  return config;
}

ModelConfig CompleteModelConfig(const ExperimentConfig& config,
                                const SubwordVocabulary& vocab,
                                const LabelVocabulary& labels, uint64_t seed) {
  ModelConfig model = config.model;
  model.vocab_size = vocab.size();
  model.label_count = labels.size();
  model.max_len = config.packer.max_len;
  model.seed = seed;
  return model;
}

Parameters TrainModel(const Dataset& train, Strategy strategy,
                      const ExperimentConfig& config,
                      const SubwordVocabulary& vocab,
                      const LabelVocabulary& labels, uint64_t seed,
                      TrainReport* report) {
  PackerConfig packer = config.packer;
  packer.strategy = strategy;
  const auto windows = PackDataset(train, packer, vocab, labels);
  Parameters params =
      InitParameters(CompleteModelConfig(config, vocab, labels, seed));
  TrainConfig train_config = config.train;
  train_config.seed = seed;
  TrainReport r = Train(params, windows, train_config);
  if (report) *report = std::move(r);
  return params;
}

CrossMatrix RunExperiment(const Dataset& train, const Dataset& eval,
                          const ExperimentConfig& config,
                          const SubwordVocabulary& vocab,
                          const LabelVocabulary& labels,
                          const ProgressCallback& progress) {
  auto train_fn = [&](Strategy strategy, uint64_t seed) -> Predictor {
    auto params = std::make_shared<Parameters>(
        TrainModel(train, strategy, config, vocab, labels, seed));
    return [params, &config, &vocab, &labels](const Dataset& data,
                                              Strategy infer) {
      PackerConfig packer = config.packer;
      packer.strategy = infer;
      return PredictDataset(*params, data, packer, vocab, labels);
    };
  };
  CellCallback on_cell;
  if (progress) {
    on_cell = [&](Strategy t, uint64_t seed, Strategy i, double f1) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "train=%s seed=%llu infer=%s f1=%.4f",
                    std::string(StrategyName(t)).c_str(),
                    static_cast<unsigned long long>(seed),
                    std::string(StrategyName(i)).c_str(), f1);
      progress(buf);
    };
  }
  return RunCrossMatrix(train_fn, eval, config.train_strategies,
                        config.infer_strategies, config.seeds, on_cell);
}

}  // namespace nerrep
