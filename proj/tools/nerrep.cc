// nerrep: corpus statistics, packing, training, prediction and the
// train x inference strategy matrix.
//
// Exit codes: 0 success, 1 an --expect assertion failed, 2 usage or I/O error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nerrep/corpus.h"
#include "nerrep/errors.h"
#include "nerrep/eval.h"
#include "nerrep/experiment.h"
#include "nerrep/labelcodec.h"
#include "nerrep/packer.h"
#include "nerrep/synth.h"
#include "nerrep/tagger.h"
#include "nerrep/tokenizer.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nerrep;

namespace {

constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;

struct CorpusArgs {
  std::vector<std::string> paths;
  std::string format = "conll";
  int layers = 2;

  Dataset Load() const {
    return LoadCorpus(paths, ParseCorpusFormat(format), layers);
  }
};

void AddCorpusOptions(CLI::App* cmd, CorpusArgs& args, const char* positional,
                      bool required = true) {
  auto* opt = cmd->add_option(positional, args.paths, "corpus files");
  if (required) opt->required();
  cmd->add_option("--format", args.format, "conll, nested or jsonl")
      ->capture_default_str();
  cmd->add_option("--nest-layers", args.layers, "IOB2 columns in nested TSV")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void AddPackerOptions(CLI::App* cmd, PackerConfig& packer, std::string& strategy) {
  cmd->add_option("--strategy", strategy, "single, merged, context or union")
      ->capture_default_str();
  cmd->add_option("--max-len", packer.max_len, "window length incl. BOS/EOS")
      ->capture_default_str();
  cmd->add_option("--context-fraction", packer.context_budget_fraction,
                  "share of leftover capacity used as context")
      ->capture_default_str();
}

void AddModelOptions(CLI::App* cmd, ModelConfig& model, TrainConfig& train) {
  cmd->add_option("--dim", model.model_dim)->capture_default_str();
  cmd->add_option("--heads", model.heads)->capture_default_str();
  cmd->add_option("--layers", model.layers, "encoder layers")
      ->capture_default_str();
  cmd->add_option("--ffn", model.ffn_dim, "feed-forward width, 0 = 4 x dim")
      ->capture_default_str();
  cmd->add_option("--dropout", model.dropout)->capture_default_str();
  cmd->add_option("--epochs", train.epochs)->capture_default_str();
  cmd->add_option("--batch-size", train.batch_size)->capture_default_str();
  cmd->add_option("--lr", train.learning_rate)->capture_default_str();
  cmd->add_option("--weight-decay", train.weight_decay)->capture_default_str();
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

std::ofstream OpenOut(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

// Writes through a temporary string so a failed run leaves no partial file.
template <typename Fn>
void WriteFile(const std::string& path, Fn&& fn) {
  std::ostringstream buffer;
  fn(buffer);
  if (path.empty() || path == "-") {
    std::cout << buffer.str();
    return;
  }
  auto out = OpenOut(path);
  out << buffer.str();
  if (!out) throw Error("write failed for '" + path + "'");
}

json PackerJson(const PackerConfig& p) {
  return {{"max_len", p.max_len},
          {"context_budget_fraction", p.context_budget_fraction},
          {"strategy", std::string(StrategyName(p.strategy))}};
}

json ModelJson(const ModelConfig& m) {
  return {{"vocab_size", m.vocab_size}, {"label_count", m.label_count},
          {"model_dim", m.model_dim},   {"heads", m.heads},
          {"layers", m.layers},         {"ffn_dim", m.hidden_dim()},
          {"max_len", m.max_len},       {"dropout", m.dropout},
          {"seed", m.seed}};
}

json TrainJson(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"seed", t.seed},
          {"optimizer", "adamw"},
          {"schedule", "linear decay to zero, no warmup"}};
}

json ReportJson(const EvalReport& r) {
  return {{"true_positives", r.true_positives},
          {"false_positives", r.false_positives},
          {"false_negatives", r.false_negatives},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1}};
}

// ---- stats ----

struct StatsArgs {
  CorpusArgs corpus;
  bool as_json = false;
};

int RunStats(const StatsArgs& args) {
  const CorpusStats s = ComputeStats(args.corpus.Load());
  if (args.as_json) {
    std::cout << json{{"sentences", s.sentence_count},
                      {"tokens", s.token_count},
                      {"annotations", s.annotation_count},
                      {"categories", s.category_count}}
                     .dump()
              << "\n";
  } else {
    std::cout << "sentences   " << s.sentence_count << "\n"
              << "tokens      " << s.token_count << "\n"
              << "annotations " << s.annotation_count << "\n"
              << "categories  " << s.category_count << "\n";
  }
  return 0;
}

// ---- pack ----

struct PackArgs {
  CorpusArgs corpus;
  PackerConfig packer;
  std::string strategy = "single";
  std::string vocab_in, labels_in;
  std::string out;
};

int RunPack(PackArgs& args) {
  args.packer.strategy = ParseStrategy(args.strategy);
  args.packer.Validate();
  const Dataset ds = args.corpus.Load();
  std::optional<SubwordVocabulary> vocab;
  if (args.vocab_in.empty()) {
    vocab = SubwordVocabulary::BuildFromDataset(ds);
  } else {
    auto in = OpenIn(args.vocab_in);
    vocab = SubwordVocabulary::Load(in);
  }
  LabelVocabulary labels;
  if (args.labels_in.empty()) {
    labels = LabelVocabulary::Build(ds);
  } else {
    auto in = OpenIn(args.labels_in);
    labels = LabelVocabulary::Load(in);
  }
  const auto windows = PackDataset(ds, args.packer, *vocab, labels);
  WriteFile(args.out, [&](std::ostream& o) { WriteWindows(windows, o); });
  WriteFile(args.out + ".vocab", [&](std::ostream& o) { vocab->Save(o); });
  WriteFile(args.out + ".labels", [&](std::ostream& o) { labels.Save(o); });
  WriteFile(args.out + ".config.json", [&](std::ostream& o) {
    o << json{{"packer", PackerJson(args.packer)},
              {"corpus", args.corpus.paths},
              {"format", args.corpus.format},
              {"windows", windows.size()}}
             .dump(2)
      << "\n";
  });
  std::cerr << "packed " << windows.size() << " windows\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string windows;
  std::string vocab, labels;
  std::string out;
  ModelConfig model;
  TrainConfig train;
  uint64_t seed = 1;
  double context_fraction = 1.0;
};

int RunTrain(TrainArgs& args) {
  auto win_in = OpenIn(args.windows);
  const auto windows = ReadWindows(win_in);
  if (windows.empty()) throw Error("window file is empty");
  auto vin = OpenIn(args.vocab.empty() ? args.windows + ".vocab" : args.vocab);
  const auto vocab = SubwordVocabulary::Load(vin);
  auto lin = OpenIn(args.labels.empty() ? args.windows + ".labels" : args.labels);
  const auto labels = LabelVocabulary::Load(lin);

  ModelConfig model = args.model;
  model.vocab_size = vocab.size();
  model.label_count = labels.size();
  model.max_len = windows.front().max_len();
  model.seed = args.seed;
  TrainConfig train = args.train;
  train.seed = args.seed;

  Checkpoint ckpt;
  ckpt.params = InitParameters(model);
  const TrainReport report =
      Train(ckpt.params, windows, train, [](int epoch, double loss) {
        std::fprintf(stderr, "epoch %d loss %.6f\n", epoch + 1, loss);
      });
  ckpt.vocab_pieces = vocab.pieces();
  ckpt.continuation_marker = vocab.continuation_marker();
  ckpt.labels = labels.labels();
  ckpt.packer.max_len = model.max_len;
  ckpt.packer.context_budget_fraction = args.context_fraction;
  ckpt.packer.strategy = windows.front().strategy;

  WriteFile(args.out, [&](std::ostream& o) { SaveCheckpoint(ckpt, o); });
  WriteFile(args.out + ".report.json", [&](std::ostream& o) {
    o << json{{"windows", args.windows},
              {"window_count", windows.size()},
              {"model", ModelJson(model)},
              {"train", TrainJson(train)},
              {"epoch_losses", report.epoch_losses},
              {"final_loss", report.final_loss},
              {"steps", report.steps}}
             .dump(2)
      << "\n";
  });
  return 0;
}

// ---- predict ----

struct PredictArgs {
  CorpusArgs corpus;
  std::string ckpt;
  std::string strategy;
  std::string out;
};

struct LoadedModel {
  Checkpoint ckpt;
  std::optional<SubwordVocabulary> vocab;
  LabelVocabulary labels;
};

LoadedModel LoadModel(const std::string& path) {
  auto in = OpenIn(path);
  LoadedModel m;
  m.ckpt = LoadCheckpoint(in);
  if (m.ckpt.vocab_pieces.empty() || m.ckpt.labels.empty()) {
    throw Error("checkpoint '" + path + "' carries no vocabularies");
  }
  m.vocab = SubwordVocabulary::FromPieces(m.ckpt.vocab_pieces,
                                          m.ckpt.continuation_marker);
  m.labels = LabelVocabulary(m.ckpt.labels);
  return m;
}

int RunPredict(const PredictArgs& args) {
  LoadedModel m = LoadModel(args.ckpt);
  PackerConfig packer = m.ckpt.packer;
  packer.strategy = ParseStrategy(args.strategy.empty()
                                      ? std::string(StrategyName(packer.strategy))
                                      : args.strategy);
  if (packer.strategy == Strategy::kUnion) {
    throw Error("union is a training representation; pick single, merged or context");
  }
  const Dataset ds = args.corpus.Load();
  const Dataset pred = PredictDataset(m.ckpt.params, ds, packer, *m.vocab, m.labels);
  WriteFile(args.out, [&](std::ostream& o) { WriteJsonl(pred, o); });
  return 0;
}

// ---- eval ----

struct EvalArgs {
  CorpusArgs gold;
  std::string pred;
  std::string pred_format = "jsonl";
  bool as_json = false;
};

int RunEval(const EvalArgs& args) {
  const Dataset gold = args.gold.Load();
  const Dataset pred =
      LoadCorpus({args.pred}, ParseCorpusFormat(args.pred_format), args.gold.layers);
  const EvalReport r = EvaluateDatasets(gold, pred);
  if (args.as_json) {
    std::cout << ReportJson(r).dump() << "\n";
  } else {
    std::printf("TP %lld FP %lld FN %lld\n",
                static_cast<long long>(r.true_positives),
                static_cast<long long>(r.false_positives),
                static_cast<long long>(r.false_negatives));
    std::printf("precision %.4f recall %.4f f1 %.4f\n", r.precision, r.recall,
                r.f1);
  }
  return 0;
}

// ---- matrix ----

struct MatrixArgs {
  CorpusArgs corpus;
  std::vector<std::string> eval_paths;
  double split = 0.8;
  uint64_t split_seed = 0;
  ExperimentConfig config = DefaultExperimentConfig();
  std::vector<std::string> train_strategies = {"single", "merged", "context", "union"};
  std::vector<std::string> infer_strategies = {"single", "merged", "context"};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "matrix-out";
  std::vector<std::string> expects;
};

// One side of an --expect: a cell mean "TRAIN/INFER", a row average
// "TRAIN/avg", or a number.
struct Operand {
  std::optional<double> number;
  Strategy train = Strategy::kSingle;
  std::optional<Strategy> infer;  // empty means the row average

  double Value(const CrossMatrix& matrix) const {
    if (number) return *number;
    if (!infer) return matrix.RowAverage(matrix.RowIndex(train));
    return matrix.Cell(train, *infer).mean;
  }
};

struct Expectation {
  std::string text;
  Operand lhs;
  std::string op;
  Operand rhs;
};

Operand ParseOperand(const std::string& text, const ExperimentConfig& config) {
  Operand o;
  const size_t slash = text.find('/');
  if (slash == std::string::npos) {
    size_t used = 0;
    o.number = std::stod(text, &used);
    if (used != text.size()) throw Error("bad number '" + text + "'");
    return o;
  }
  o.train = ParseStrategy(text.substr(0, slash));
  const std::string col = text.substr(slash + 1);
  if (col != "avg") o.infer = ParseStrategy(col);
  const auto& rows = config.train_strategies;
  const auto& cols = config.infer_strategies;
  if (std::find(rows.begin(), rows.end(), o.train) == rows.end() ||
      (o.infer && std::find(cols.begin(), cols.end(), *o.infer) == cols.end())) {
    throw Error("'" + text + "' is not part of the matrix");
  }
  return o;
}

// "LHS OP RHS" with OP one of > >= < <=.
Expectation ParseExpectation(const std::string& text,
                             const ExperimentConfig& config) {
  static const std::regex re(R"(\s*([\w./-]+)\s*(>=|<=|>|<)\s*([\w./-]+)\s*)");
  std::smatch m;
  try {
    if (!std::regex_match(text, m, re)) throw Error("expected LHS OP RHS");
    return {text, ParseOperand(m[1], config), m[2], ParseOperand(m[3], config)};
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--expect",
                               "cannot use '" + text + "': " + e.what());
  }
}

int RunMatrix(MatrixArgs& args) {
  ExperimentConfig& config = args.config;
  config.train_strategies.clear();
  for (const auto& s : args.train_strategies) {
    config.train_strategies.push_back(ParseStrategy(s));
  }
  config.infer_strategies.clear();
  for (const auto& s : args.infer_strategies) {
    config.infer_strategies.push_back(ParseStrategy(s));
  }
  config.seeds = args.seeds;
  config.packer.Validate();
  std::vector<Expectation> expects;
  for (const auto& e : args.expects) expects.push_back(ParseExpectation(e, config));

  Dataset train, eval;
  const Dataset all = args.corpus.Load();
  if (args.eval_paths.empty()) {
    std::tie(train, eval) = SplitDataset(all, args.split, args.split_seed);
  } else {
    train = all;
    eval = LoadCorpus(args.eval_paths, ParseCorpusFormat(args.corpus.format),
                      args.corpus.layers);
  }
  const auto vocab = SubwordVocabulary::BuildFromDataset(train);
  const auto labels = LabelVocabulary::Build(train);

  const CrossMatrix matrix = RunExperiment(
      train, eval, config, vocab, labels,
      [](const std::string& msg) { std::cerr << msg << "\n"; });

  fs::create_directories(args.out_dir);
  const std::string dir = args.out_dir + "/";
  WriteFile(dir + "matrix.csv", [&](std::ostream& o) { WriteCrossMatrixCsv(matrix, o); });
  WriteFile(dir + "matrix.txt", [&](std::ostream& o) { WriteCrossMatrixTable(matrix, o); });

  json cells = json::array();
  for (size_t r = 0; r < matrix.train_strategies.size(); ++r) {
    for (size_t c = 0; c < matrix.infer_strategies.size(); ++c) {
      const auto& cell = matrix.cells[r][c];
      cells.push_back({{"train", StrategyName(matrix.train_strategies[r])},
                       {"infer", StrategyName(matrix.infer_strategies[c])},
                       {"f1_runs", cell.values},
                       {"f1_mean", cell.mean},
                       {"f1_sigma", cell.sigma}});
    }
  }
  json record = {
      {"corpus", args.corpus.paths},
      {"format", args.corpus.format},
      {"eval_corpus", args.eval_paths},
      {"split", args.eval_paths.empty() ? json{{"train_fraction", args.split},
                                               {"seed", args.split_seed}}
                                        : json(nullptr)},
      {"train_documents", train.documents.size()},
      {"eval_documents", eval.documents.size()},
      {"packer", PackerJson(config.packer)},
      {"model", ModelJson(CompleteModelConfig(config, vocab, labels, 0))},
      {"train", TrainJson(config.train)},
      {"seeds", config.seeds},
      {"cells", cells}};
  json checks = json::array();
  int failed = 0;
  for (const auto& e : expects) {
    const double lhs = e.lhs.Value(matrix);
    const double rhs = e.rhs.Value(matrix);
    bool ok = e.op == ">"    ? lhs > rhs
              : e.op == ">=" ? lhs >= rhs
              : e.op == "<"  ? lhs < rhs
                             : lhs <= rhs;
    checks.push_back({{"expect", e.text}, {"lhs", lhs}, {"rhs", rhs}, {"ok", ok}});
    std::cerr << (ok ? "ok   " : "FAIL ") << e.text << " (" << lhs << " vs "
              << rhs << ")\n";
    if (!ok) ++failed;
  }
  record["expectations"] = checks;
  WriteFile(dir + "experiment.json",
            [&](std::ostream& o) { o << record.dump(2) << "\n"; });
  WriteCrossMatrixTable(matrix, std::cout);
  return failed > 0 ? kExitAssertion : 0;
}

// ---- synth ----

struct SynthArgs {
  SynthConfig config;
  std::string cue_side = "left";
  std::string out;
  std::string meta;
};

int RunSynth(SynthArgs& args) {
  if (args.cue_side == "left") {
    args.config.cue_side = CueSide::kLeft;
  } else if (args.cue_side == "right") {
    args.config.cue_side = CueSide::kRight;
  } else {
    throw CLI::ValidationError("--cue-side", "expected left or right");
  }
  const SynthCorpus corpus = GenerateSynthCorpus(args.config);
  WriteFile(args.out, [&](std::ostream& o) { WriteJsonl(corpus.dataset, o); });
  if (!args.meta.empty()) {
    const SynthConfig& c = args.config;
    json mentions = json::array();
    for (const auto& m : corpus.mentions) {
      mentions.push_back({{"doc_id", corpus.dataset.documents[m.document].doc_id},
                          {"sentence", m.sentence},
                          {"start", m.start},
                          {"end", m.end},
                          {"category", m.category},
                          {"form", m.form},
                          {"context_dependent", m.context_dependent},
                          {"cue_sentence", m.cue_sentence}});
    }
    WriteFile(args.meta, [&](std::ostream& o) {
      o << json{{"config",
                 {{"n_docs", c.n_docs},
                  {"sentences_per_doc", c.sentences_per_doc},
                  {"vocab_size", c.vocab_size},
                  {"ambiguous_entity_count", c.ambiguous_entity_count},
                  {"unambiguous_per_category", c.unambiguous_per_category},
                  {"category_count", c.category_count},
                  {"cue_distance", c.cue_distance},
                  {"cue_distance_max", c.max_distance()},
                  {"context_dependence_rate", c.context_dependence_rate},
                  {"ambiguous_bias", c.ambiguous_bias},
                  {"cue_side", args.cue_side},
                  {"seed", c.seed}}},
                {"mentions", mentions}}
               .dump(2)
        << "\n";
    });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packing strategies for transformer sequence labelling"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "corpus counts");
  AddCorpusOptions(stats_cmd, stats.corpus, "files");
  stats_cmd->add_flag("--json", stats.as_json, "print one JSON object");

  PackArgs pack;
  auto* pack_cmd = app.add_subcommand("pack", "write a window file");
  AddCorpusOptions(pack_cmd, pack.corpus, "files");
  AddPackerOptions(pack_cmd, pack.packer, pack.strategy);
  pack_cmd->add_option("--vocab", pack.vocab_in, "subword vocabulary (built when absent)");
  pack_cmd->add_option("--labels", pack.labels_in, "label vocabulary (built when absent)");
  pack_cmd->add_option("--out", pack.out, "window file; vocabularies go next to it")
      ->required();

  TrainArgs train;
  train.train = DefaultExperimentConfig().train;
  auto* train_cmd = app.add_subcommand("train", "train a tagger on a window file");
  train_cmd->add_option("--windows", train.windows)->required();
  train_cmd->add_option("--vocab", train.vocab, "default: <windows>.vocab");
  train_cmd->add_option("--labels", train.labels, "default: <windows>.labels");
  train_cmd->add_option("--out", train.out, "checkpoint path")->required();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--context-fraction", train.context_fraction,
                        "recorded for context inference")
      ->capture_default_str();
  AddModelOptions(train_cmd, train.model, train.train);

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "label a corpus");
  AddCorpusOptions(predict_cmd, predict.corpus, "files");
  predict_cmd->add_option("--ckpt", predict.ckpt)->required();
  predict_cmd->add_option("--strategy", predict.strategy,
                          "inference packing (default: the training one)");
  predict_cmd->add_option("--out", predict.out, "JSONL output, default stdout");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "strict span scores");
  AddCorpusOptions(eval_cmd, eval.gold, "gold");
  eval_cmd->add_option("--pred", eval.pred, "predictions")->required();
  eval_cmd->add_option("--pred-format", eval.pred_format)->capture_default_str();
  eval_cmd->add_flag("--json", eval.as_json);

  MatrixArgs matrix;
  auto* matrix_cmd = app.add_subcommand("matrix", "train x inference strategy matrix");
  AddCorpusOptions(matrix_cmd, matrix.corpus, "files");
  matrix_cmd->add_option("--max-len", matrix.config.packer.max_len)->capture_default_str();
  matrix_cmd->add_option("--context-fraction",
                         matrix.config.packer.context_budget_fraction)
      ->capture_default_str();
  AddModelOptions(matrix_cmd, matrix.config.model, matrix.config.train);
  matrix_cmd->add_option("--eval", matrix.eval_paths, "evaluation files (else split)");
  matrix_cmd->add_option("--split", matrix.split, "train fraction when splitting")
      ->capture_default_str();
  matrix_cmd->add_option("--split-seed", matrix.split_seed)->capture_default_str();
  matrix_cmd->add_option("--train-strategies", matrix.train_strategies)
      ->capture_default_str();
  matrix_cmd->add_option("--infer-strategies", matrix.infer_strategies)
      ->capture_default_str();
  matrix_cmd->add_option("--seeds", matrix.seeds)->capture_default_str();
  matrix_cmd->add_option("--out-dir", matrix.out_dir)->capture_default_str();
  matrix_cmd->add_option("--expect", matrix.expects,
                         "assertion such as context/context>context/single or "
                         "union/avg>=context/avg; exit 1 when one fails");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--docs", synth.config.n_docs)->capture_default_str();
  synth_cmd->add_option("--sentences", synth.config.sentences_per_doc)
      ->capture_default_str();
  synth_cmd->add_option("--rate", synth.config.context_dependence_rate)
      ->capture_default_str();
  synth_cmd->add_option("--cue-distance", synth.config.cue_distance)
      ->capture_default_str();
  synth_cmd->add_option("--cue-distance-max", synth.config.cue_distance_max)
      ->capture_default_str();
  synth_cmd->add_option("--categories", synth.config.category_count)
      ->capture_default_str();
  synth_cmd->add_option("--fillers", synth.config.vocab_size)->capture_default_str();
  synth_cmd->add_option("--ambiguous", synth.config.ambiguous_entity_count)
      ->capture_default_str();
  synth_cmd->add_option("--bias", synth.config.ambiguous_bias,
                        "preferred-category probability of ambiguous forms; <0 uniform")
      ->capture_default_str();
  synth_cmd->add_option("--cue-side", synth.cue_side)->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "JSONL output, default stdout");
  synth_cmd->add_option("--meta", synth.meta, "mention metadata JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (stats_cmd->parsed()) return RunStats(stats);
    if (pack_cmd->parsed()) return RunPack(pack);
    if (train_cmd->parsed()) return RunTrain(train);
    if (predict_cmd->parsed()) return RunPredict(predict);
    if (eval_cmd->parsed()) return RunEval(eval);
    if (matrix_cmd->parsed()) return RunMatrix(matrix);
    if (synth_cmd->parsed()) return RunSynth(synth);
  } catch (const CLI::ParseError& e) {
    std::cerr << "nerrep: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "nerrep: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
