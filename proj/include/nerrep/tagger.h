#ifndef NERREP_TAGGER_H_
#define NERREP_TAGGER_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nerrep/corpus.h"
#include "nerrep/labelcodec.h"
#include "nerrep/packer.h"
#include "nerrep/tokenizer.h"

namespace nerrep {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int vocab_size = 0;
  int label_count = 0;
  int model_dim = 64;
  int heads = 4;
  int layers = 2;
  int ffn_dim = 0;  // 0 means 4 * model_dim
  int max_len = 256;
  double dropout = 0.2;
  uint64_t seed = 0;

  int head_dim() const { return model_dim / heads; }
  int hidden_dim() const { return ffn_dim > 0 ? ffn_dim : 4 * model_dim; }
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  // Desk-scale default; large pretrained encoders are fine-tuned at 5e-6.
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;

  void Validate() const;
};

// Named slice of the flat parameter vector.
struct TensorSlot {
  std::string name;
  int rows = 0;
  int cols = 0;
  size_t offset = 0;
  bool decay = false;  // receives weight decay

  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// All model weights in one flat vector; tensors are row-major views into it.
class Parameters {
 public:
  explicit Parameters(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorSlot>& slots() const { return slots_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  size_t size() const { return values_.size(); }

  int Find(const std::string& name) const;  // slot index or -1

  Eigen::Map<Matrix> Tensor(int slot) {
    const auto& s = slots_[slot];
    return {values_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const Matrix> Tensor(int slot) const {
    const auto& s = slots_[slot];
    return {values_.data() + s.offset, s.rows, s.cols};
  }

  bool operator==(const Parameters& other) const {
    return config_ == other.config_ && values_ == other.values_;
  }

 private:
  ModelConfig config_;
  std::vector<TensorSlot> slots_;
  std::vector<double> values_;
};

// Deterministic given config.seed. Throws Error on an invalid config.
Parameters InitParameters(const ModelConfig& config);

// Logits at the classifier-active positions of each window, rows in
// position order. Evaluation mode (no dropout).
std::vector<Matrix> Forward(const Parameters& params,
                            std::span<const EncodedWindow> windows);

struct LossResult {
  double loss = 0.0;  // mean cross-entropy over classifier-active positions
  int active_count = 0;
  std::vector<double> gradient;  // same layout as Parameters::values()
  // When requested: per window, max_len x model_dim gradient reaching the
  // final hidden states through the classifier alone.
  std::vector<Matrix> classifier_input_gradients;
};

struct LossOptions {
  bool compute_gradient = true;
  bool keep_classifier_input_gradients = false;
  // Training mode: dropout with masks drawn from (seed, step).
  bool training = false;
  uint64_t dropout_seed = 0;
  uint64_t step = 0;
};

// Throws Error when the batch has no classifier-active position or a token
// id is outside the vocabulary.
LossResult ComputeLoss(const Parameters& params,
                       std::span<const EncodedWindow> windows,
                       const LossOptions& options = {});

struct TrainReport {
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
  int64_t steps = 0;

  bool operator==(const TrainReport&) const = default;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// AdamW with linear learning-rate decay to zero over all steps and no
// warmup. Windows without classifier-active positions are skipped.
TrainReport Train(Parameters& params, const std::vector<EncodedWindow>& windows,
                  const TrainConfig& config,
                  const EpochCallback& on_epoch = nullptr);

// Argmax label id per classifier-active position, ties to the lowest id.
std::vector<std::vector<int>> PredictLabelIds(
    const Parameters& params, std::span<const EncodedWindow> windows);

// Packs the document with `packer.strategy` (single, merged or context),
// classifies every word once and decodes spans per sentence.
std::vector<std::vector<Annotation>> PredictDocument(
    const Parameters& params, const Document& document,
    const PackerConfig& packer, const SubwordVocabulary& vocab,
    const LabelVocabulary& labels);

// Copy of the dataset with annotations replaced by predictions.
Dataset PredictDataset(const Parameters& params, const Dataset& dataset,
                       const PackerConfig& packer,
                       const SubwordVocabulary& vocab,
                       const LabelVocabulary& labels);

// Self-describing checkpoint: model config, tensors, and optionally the
// vocabularies and packer settings used to produce the training windows.
struct Checkpoint {
  Parameters params{ModelConfig{1, 1, 8, 1, 1, 0, 8, 0.0, 0}};
  std::vector<std::string> vocab_pieces;
  std::string continuation_marker = "##";
  std::vector<std::string> labels;
  PackerConfig packer;
};

void SaveCheckpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint LoadCheckpoint(std::istream& in);

}  // namespace nerrep

#endif  // NERREP_TAGGER_H_
