#ifndef NERREP_EXPERIMENT_H_
#define NERREP_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/eval.h"
#include "nerrep/labelcodec.h"
#include "nerrep/packer.h"
#include "nerrep/tagger.h"
#include "nerrep/tokenizer.h"

namespace nerrep {

// Settings shared by every cell of a train x inference experiment. The
// model's vocab_size, label_count, max_len and seed are filled per run.
struct ExperimentConfig {
  PackerConfig packer;
  ModelConfig model;
  TrainConfig train;
  std::vector<Strategy> train_strategies = {Strategy::kSingle, Strategy::kMerged,
                                            Strategy::kContext, Strategy::kUnion};
  std::vector<Strategy> infer_strategies = {Strategy::kSingle, Strategy::kMerged,
                                            Strategy::kContext};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
};

// The defaults of the reference setup, for the record: sequence length 256,
// dropout 0.2, 20 epochs, AdamW, linear schedule without warmup, learning
// rate 5e-6 (here 1e-3, since the encoder is trained from scratch).
ExperimentConfig DefaultExperimentConfig();

// Model config completed for a vocabulary, label set and seed.
ModelConfig CompleteModelConfig(const ExperimentConfig& config,
                                const SubwordVocabulary& vocab,
                                const LabelVocabulary& labels, uint64_t seed);

// Packs `train` with the strategy, initializes from the seed and trains.
Parameters TrainModel(const Dataset& train, Strategy strategy,
                      const ExperimentConfig& config,
                      const SubwordVocabulary& vocab,
                      const LabelVocabulary& labels, uint64_t seed,
                      TrainReport* report = nullptr);

using ProgressCallback = std::function<void(const std::string& message)>;

// Full cross matrix: one model per (training strategy, seed), scored on
// `eval` under every inference strategy.
CrossMatrix RunExperiment(const Dataset& train, const Dataset& eval,
                          const ExperimentConfig& config,
                          const SubwordVocabulary& vocab,
                          const LabelVocabulary& labels,
                          const ProgressCallback& progress = nullptr);

}  // namespace nerrep

#endif  // NERREP_EXPERIMENT_H_
