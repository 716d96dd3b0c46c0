// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [--only N[,N...]] [--conll-dir DIR] [--cli PATH]
//
// Exit status is 1 when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nerrep/corpus.h"
#include "nerrep/errors.h"
#include "nerrep/eval.h"
#include "nerrep/experiment.h"
#include "nerrep/labelcodec.h"
#include "nerrep/packer.h"
#include "nerrep/synth.h"
#include "nerrep/tagger.h"
#include "nerrep/tokenizer.h"
#include "oracles.h"
#include "test_util.h"

namespace fs = std::filesystem;
using namespace nerrep;
using nerrep::testing::RandomDocument;
using nerrep::testing::RandomNestedSpans;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kFail;
  std::string detail;
};

Outcome Pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome Fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome Skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

struct Options {
  std::set<int> only;
  std::string conll_dir;
  std::string cli = NERREP_CLI_PATH;
};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

using Clock = std::chrono::steady_clock;
double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Outcome CodecRoundTrip() {
  Random rng(20240101);
  const std::vector<std::string> cats = {"PER", "LOC", "ORG", "MISC"};
  int max_layers = 0, spans = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int len = 1 + static_cast<int>(rng.Below(40));
    const auto gold = RandomNestedSpans(rng, len, 4, cats);
    const auto labels = EncodeSentence(gold, len);
    for (const auto& l : labels) {
      max_layers = std::max(max_layers, static_cast<int>(l.parts.size()));
    }
    spans += static_cast<int>(gold.size());
    if (DecodeLabels(labels) != gold) {
      return Fail("mismatch on trial " + std::to_string(trial));
    }
  }
  if (max_layers != 4) {
    return Fail("generator never reached depth 4 (max " +
                std::to_string(max_layers) + ")");
  }
  return Pass("1000 sentences, " + std::to_string(spans) +
              " spans, depth up to 4, all exact");
}

// ---------------------------------------------------------------- 2

// Independent multiplicity count from provenance.
bool MultiplicityIs(const std::vector<EncodedWindow>& windows,
                    const Document& doc, int expected) {
  std::map<std::tuple<int, int>, int> seen;
  for (const auto& w : windows) {
    int active = 0;
    for (auto m : w.classifier_mask) active += m;
    if (active != static_cast<int>(w.provenance.size())) return false;
    for (const auto& p : w.provenance) {
      if (p.doc_id != doc.doc_id) return false;
      ++seen[{p.sentence, p.word}];
    }
  }
  size_t words = 0;
  for (size_t s = 0; s < doc.sentences.size(); ++s) {
    for (int w = 0; w < doc.sentences[s].size(); ++w) {
      ++words;
      auto it = seen.find({static_cast<int>(s), w});
      if (it == seen.end() || it->second != expected) return false;
    }
  }
  return seen.size() == words;
}

Outcome PackingCoverage() {
  Random rng(777);
  int windows_checked = 0;
  for (int d = 0; d < 200; ++d) {
    const Document raw = RandomDocument(rng, "doc" + std::to_string(d), 10, 30, 3);
    const Dataset ds = Dataset::FromDocuments({raw});
    const auto vocab = SubwordVocabulary::BuildFromDataset(ds, rng.Bernoulli(0.5));
    const auto labels = LabelVocabulary::Build(ds);
    const Document& doc = ds.documents[0];
    PackerConfig config;
    config.max_len = 8 + static_cast<int>(rng.Below(60));
    config.context_budget_fraction = rng.Bernoulli(0.5) ? 1.0 : 0.25;
    const auto prepared = PrepareDocument(doc, vocab, labels);
    size_t parts = 0;
    for (Strategy s : {Strategy::kSingle, Strategy::kMerged, Strategy::kContext}) {
      config.strategy = s;
      const auto w = PackDocument(doc, config, vocab, labels);
      if (!MultiplicityIs(w, doc, 1) || !CheckCoverage(w, doc, 1).ok()) {
        return Fail(std::string(StrategyName(s)) + " coverage broken on doc " +
                    std::to_string(d));
      }
      parts += w.size();
      windows_checked += static_cast<int>(w.size());
    }
    config.strategy = Strategy::kUnion;
    const auto u = PackDocument(doc, config, vocab, labels);
    if (!MultiplicityIs(u, doc, 3) || !CheckCoverage(u, doc, 3).ok()) {
      return Fail("union coverage broken on doc " + std::to_string(d));
    }
    if (u.size() != parts) return Fail("union size is not the sum of its parts");
    windows_checked += static_cast<int>(u.size());
  }

  // Five sentences that merge into three windows.
  Document five;
  five.doc_id = "five";
  for (int n : {3, 4, 2, 5, 1}) {
    five.sentences.push_back(
        nerrep::testing::MakeSentence(std::vector<std::string>(n, "a")));
  }
  const Dataset ds = Dataset::FromDocuments({five});
  const auto vocab = SubwordVocabulary::BuildFromDataset(ds, false);
  const auto labels = LabelVocabulary::Build(ds);
  PackerConfig c;
  c.max_len = 9;
  size_t counts[4];
  for (Strategy s : {Strategy::kSingle, Strategy::kMerged, Strategy::kContext,
                     Strategy::kUnion}) {
    c.strategy = s;
    counts[static_cast<int>(s)] =
        PackDocument(ds.documents[0], c, vocab, labels).size();
  }
  if (counts[0] != 5 || counts[1] != 3 || counts[3] != counts[0] + counts[1] + counts[2]) {
    return Fail("example document gave " + std::to_string(counts[0]) + "+" +
                std::to_string(counts[1]) + "+" + std::to_string(counts[2]) +
                " -> " + std::to_string(counts[3]));
  }
  return Pass("200 docs: multiplicity 1/1/1/3 exact over " +
              std::to_string(windows_checked) +
              " windows; union = single+merged+context everywhere; "
              "5-sentence doc 5+3+" + std::to_string(counts[2]) + " -> " +
              std::to_string(counts[3]) +
              " (context count always equals single count with sentence "
              "fragments, so the 5+3+6 shape cannot occur)");
}

// ---------------------------------------------------------------- 3

struct SmallModel {
  SynthCorpus corpus;
  std::optional<SubwordVocabulary> vocab;
  LabelVocabulary labels;
};

SmallModel MakeSmallModelData(uint64_t seed) {
  SmallModel m;
  SynthConfig sc;
  sc.n_docs = 4;
  sc.sentences_per_doc = 6;
  sc.seed = seed;
  m.corpus = GenerateSynthCorpus(sc);
  m.vocab = SubwordVocabulary::BuildFromDataset(m.corpus.dataset);
  m.labels = LabelVocabulary::Build(m.corpus.dataset);
  return m;
}

bool BitIdentical(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
    if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a[i].size()) != 0) {
      return false;
    }
  }
  return true;
}

Outcome MaskSoundness() {
  Random rng(31337);
  const uint64_t seed = rng.Next();
  SmallModel data = MakeSmallModelData(seed);
  PackerConfig packer;
  packer.max_len = 40;
  ModelConfig mc;
  mc.vocab_size = data.vocab->size();
  mc.label_count = data.labels.size();
  mc.model_dim = 16;
  mc.heads = 4;
  mc.layers = 2;
  mc.max_len = packer.max_len;
  mc.seed = seed;
  const Parameters params = InitParameters(mc);

  int pad_mutations = 0;
  for (Strategy s : {Strategy::kSingle, Strategy::kMerged, Strategy::kContext}) {
    packer.strategy = s;
    auto windows = PackDataset(data.corpus.dataset, packer, *data.vocab, data.labels);
    const auto base = Forward(params, windows);
    for (int round = 0; round < 5; ++round) {
      auto mutated = windows;
      for (auto& w : mutated) {
        for (int i = 0; i < w.max_len(); ++i) {
          if (!w.attention_mask[i]) {
            w.subtoken_ids[i] = static_cast<int>(rng.Below(mc.vocab_size));
            ++pad_mutations;
          }
        }
      }
      if (!BitIdentical(base, Forward(params, mutated))) {
        return Fail("PAD mutation changed active logits (" +
                    std::string(StrategyName(s)) + ")");
      }
    }
  }

  packer.strategy = Strategy::kContext;
  const auto windows =
      PackDataset(data.corpus.dataset, packer, *data.vocab, data.labels);
  LossOptions options;
  options.keep_classifier_input_gradients = true;
  const LossResult r = ComputeLoss(params, windows, options);
  int context_rows = 0;
  for (size_t w = 0; w < windows.size(); ++w) {
    const auto& g = r.classifier_input_gradients[w];
    for (int i = 0; i < windows[w].max_len(); ++i) {
      if (windows[w].classifier_mask[i]) continue;
      if (windows[w].attention_mask[i]) ++context_rows;
      for (int k = 0; k < g.cols(); ++k) {
        if (g(i, k) != 0.0) return Fail("classifier gradient leaks to a masked row");
      }
    }
  }
  if (context_rows == 0) return Fail("no context positions to check");

  // A context token must reach an active logit through attention.
  const auto base = Forward(params, windows);
  int changed = 0, tried = 0;
  for (size_t w = 0; w < windows.size() && tried < 50; ++w) {
    for (int i = 1; i < windows[w].max_len(); ++i) {
      const auto& win = windows[w];
      if (!win.attention_mask[i] || win.classifier_mask[i] ||
          win.subtoken_ids[i] == data.vocab->eos_id()) {
        continue;
      }
      EncodedWindow m = win;
      m.subtoken_ids[i] = (m.subtoken_ids[i] + 1 +
                           static_cast<int>(rng.Below(mc.vocab_size - 1))) %
                          mc.vocab_size;
      ++tried;
      if (!BitIdentical(std::vector<Matrix>{base[w]}, Forward(params, std::span(&m, 1)))) ++changed;
      break;
    }
  }
  if (changed == 0) return Fail("no context mutation reached an active logit");
  return Pass(std::to_string(pad_mutations) +
              " PAD mutations bit-identical; classifier-path gradient exactly 0 on " +
              std::to_string(context_rows) + " context rows; " +
              std::to_string(changed) + "/" + std::to_string(tried) +
              " context mutations moved active logits");
}

// ---------------------------------------------------------------- 4

Outcome GradientCheck() {
  SmallModel data = MakeSmallModelData(5);
  PackerConfig packer;
  packer.max_len = 24;
  packer.strategy = Strategy::kContext;
  auto windows = PackDataset(data.corpus.dataset, packer, *data.vocab, data.labels);
  windows.resize(std::min<size_t>(windows.size(), 6));
  ModelConfig mc;
  mc.vocab_size = data.vocab->size();
  mc.label_count = data.labels.size();
  mc.model_dim = 8;
  mc.heads = 2;
  mc.layers = 2;
  mc.ffn_dim = 12;
  mc.max_len = packer.max_len;
  mc.dropout = 0.2;
  mc.seed = 5;
  Parameters params = InitParameters(mc);

  // Training mode: dropout masks are fixed by (seed, step), so the loss is a
  // deterministic function of the parameters.
  LossOptions options;
  options.training = true;
  options.dropout_seed = 9;
  options.step = 3;
  const LossResult r = ComputeLoss(params, windows, options);
  LossOptions probe = options;
  probe.compute_gradient = false;

  Random rng(4242);
  double worst = 0.0;
  int checked = 0;
  std::set<std::string> slots_hit;
  const double eps = 1e-5;
  // A few parameters from every tensor, then random ones up to 60.
  std::vector<size_t> picks;
  for (const auto& slot : params.slots()) {
    int taken = 0;
    for (int attempt = 0; attempt < 200 && taken < 2; ++attempt) {
      const size_t i = slot.offset + rng.Below(slot.size());
      if (std::abs(r.gradient[i]) > 1e-6) {
        picks.push_back(i);
        ++taken;
      }
    }
  }
  while (picks.size() < 60) {
    const size_t i = rng.Below(params.size());
    if (std::abs(r.gradient[i]) > 1e-6) picks.push_back(i);
  }
  for (size_t i : picks) {
    const double saved = params.values()[i];
    params.values()[i] = saved + eps;
    const double up = ComputeLoss(params, windows, probe).loss;
    params.values()[i] = saved - eps;
    const double down = ComputeLoss(params, windows, probe).loss;
    params.values()[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double analytic = r.gradient[i];
    const double rel = std::abs(numeric - analytic) /
                       std::max(std::abs(numeric), std::abs(analytic));
    worst = std::max(worst, rel);
    ++checked;
    for (const auto& slot : params.slots()) {
      if (i >= slot.offset && i < slot.offset + slot.size()) slots_hit.insert(slot.name);
    }
  }
  const std::string detail = std::to_string(checked) + " parameters across " +
                             std::to_string(slots_hit.size()) +
                             " tensors, max relative error " + Fmt("%.2e", worst);
  if (checked >= 50 && worst < 1e-4) return Pass(detail);
  return Fail(detail);
}

// ---------------------------------------------------------------- 5

Outcome EvaluatorOracle() {
  Random rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gold = nerrep::testing::RandomSpanKeys(rng, 10);
    const auto pred = nerrep::testing::RandomSpanKeys(rng, 10);
    const EvalReport r = StrictSpanF1(gold, pred);
    const int tp = nerrep::testing::MaxMatchingOracle(gold, pred);
    if (r.true_positives != tp ||
        r.false_positives != static_cast<int64_t>(pred.size()) - tp ||
        r.false_negatives != static_cast<int64_t>(gold.size()) - tp) {
      return Fail("count mismatch on case " + std::to_string(trial));
    }
  }
  const SpanKey a{"d", 0, 0, 2, "PER"}, b{"d", 0, 3, 4, "LOC"},
      c{"d", 0, 2, 3, "ORG"}, wide{"d", 0, 0, 3, "PER"};
  const auto same = StrictSpanF1({a}, {a});
  const auto strict = StrictSpanF1({a}, {wide});
  const auto half = StrictSpanF1({a, b}, {a, c});
  if (!(same.precision == 1.0 && same.recall == 1.0 && same.f1 == 1.0)) {
    return Fail("identity example");
  }
  if (!(strict.true_positives == 0 && strict.f1 == 0.0)) {
    return Fail("strictness example");
  }
  if (!(half.precision == 0.5 && half.recall == 0.5 && half.f1 == 0.5)) {
    return Fail("half example");
  }
  return Pass("500 random cases match max-matching oracle; 3 examples exact");
}

// ---------------------------------------------------------------- 6

Outcome Phenomenon() {
  SynthConfig sc;
  sc.n_docs = 200;
  sc.context_dependence_rate = 0.7;
  sc.cue_distance = 1;
  sc.cue_distance_max = 3;
  sc.seed = 2024;
  const SynthCorpus corpus = GenerateSynthCorpus(sc);
  const auto [train, eval] = SplitDataset(corpus.dataset, 0.8, 0);
  const auto vocab = SubwordVocabulary::BuildFromDataset(train);
  const auto labels = LabelVocabulary::Build(train);

  ExperimentConfig config = DefaultExperimentConfig();
  config.packer.max_len = 64;
  config.model.model_dim = 32;
  config.model.heads = 4;
  config.model.layers = 2;
  config.train.epochs = 10;
  config.train.batch_size = 16;
  config.train_strategies = {Strategy::kContext, Strategy::kUnion};
  config.seeds = {1, 2, 3, 4, 5};

  const auto t0 = Clock::now();
  const CrossMatrix m = RunExperiment(train, eval, config, vocab, labels,
                                      [&](const std::string& msg) {
                                        std::fprintf(stderr, "  [%6.0fs] %s\n",
                                                     Since(t0), msg.c_str());
                                      });
  WriteCrossMatrixTable(m, std::cout);

  int a = 0, b = 0, c = 0;
  const size_t n = config.seeds.size();
  auto at = [&](Strategy tr, Strategy inf, size_t k) {
    return m.Cell(tr, inf).values[k];
  };
  for (size_t k = 0; k < n; ++k) {
    double ctx_row = 0, uni_row = 0;
    for (Strategy inf : kInferenceStrategies) {
      ctx_row += at(Strategy::kContext, inf, k);
      uni_row += at(Strategy::kUnion, inf, k);
    }
    a += at(Strategy::kContext, Strategy::kContext, k) -
             at(Strategy::kContext, Strategy::kSingle, k) > 0;
    b += uni_row >= ctx_row;
    c += at(Strategy::kUnion, Strategy::kSingle, k) >
         at(Strategy::kContext, Strategy::kSingle, k);
  }
  const double minutes = Since(t0) / 60.0;
  const std::string detail =
      "a " + std::to_string(a) + "/5, b " + std::to_string(b) + "/5, c " +
      std::to_string(c) + "/5 seeds; " + Fmt("%.1f min", minutes);
  if (a >= 4 && b >= 4 && c >= 4 && minutes < 30.0) return Pass(detail);
  return Fail(detail);
}

// ---------------------------------------------------------------- 7

std::vector<std::string> FindConll(const std::string& dir) {
  const std::vector<std::vector<std::string>> layouts = {
      {"eng.train", "eng.testa", "eng.testb"},
      {"train.txt", "valid.txt", "test.txt"},
      {"train.txt", "dev.txt", "test.txt"}};
  for (const auto& names : layouts) {
    std::vector<std::string> paths;
    for (const auto& n : names) {
      if (fs::exists(fs::path(dir) / n)) paths.push_back((fs::path(dir) / n).string());
    }
    if (paths.size() == names.size()) return paths;
  }
  return {};
}

Outcome ConllStats(const Options& opt) {
  const std::string dir =
      opt.conll_dir.empty() ? std::string(NERREP_SOURCE_DIR) + "/data/conll2003"
                            : opt.conll_dir;
  const auto paths = FindConll(dir);
  if (paths.empty()) return Skip("no CoNLL 2003 files under " + dir);
  const CorpusStats s = ComputeStats(LoadCorpus(paths, CorpusFormat::kConll2003));
  const std::string detail =
      std::to_string(s.sentence_count) + " sentences, " +
      std::to_string(s.token_count) + " tokens, " +
      std::to_string(s.annotation_count) + " annotations, " +
      std::to_string(s.category_count) + " categories";
  if (s == CorpusStats{20744, 301418, 35089, 4}) return Pass(detail);
  return Fail(detail);
}

// ---------------------------------------------------------------- 8

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int Shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism(const Options& opt) {
  // Library path.
  auto run = [] {
    SynthConfig sc;
    sc.n_docs = 20;
    sc.seed = 8;
    const SynthCorpus corpus = GenerateSynthCorpus(sc);
    const auto vocab = SubwordVocabulary::BuildFromDataset(corpus.dataset);
    const auto labels = LabelVocabulary::Build(corpus.dataset);
    PackerConfig packer;
    packer.max_len = 48;
    packer.strategy = Strategy::kUnion;
    const auto windows = PackDataset(corpus.dataset, packer, vocab, labels);
    std::ostringstream win, ckpt, csv;
    WriteWindows(windows, win);

    ExperimentConfig config;
    config.packer.max_len = 48;
    config.model.model_dim = 8;
    config.model.heads = 2;
    config.model.layers = 1;
    config.train.epochs = 2;
    config.train_strategies = {Strategy::kSingle, Strategy::kUnion};
    config.seeds = {3, 4};
    Checkpoint c;
    c.params = TrainModel(corpus.dataset, Strategy::kUnion, config, vocab, labels, 3);
    c.vocab_pieces = vocab.pieces();
    c.labels = labels.labels();
    SaveCheckpoint(c, ckpt);
    const auto [train, eval] = SplitDataset(corpus.dataset, 0.8, 1);
    WriteCrossMatrixCsv(RunExperiment(train, eval, config, vocab, labels), csv);
    return std::vector<std::string>{win.str(), ckpt.str(), csv.str()};
  };
  const auto first = run();
  const auto second = run();
  const char* names[] = {"window file", "checkpoint", "matrix"};
  for (int i = 0; i < 3; ++i) {
    if (first[i] != second[i]) return Fail(std::string(names[i]) + " differs (library)");
  }

  // Command-line path.
  const fs::path dir = fs::temp_directory_path() /
                       ("nerrep-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";
  const std::string tiny = " --dim 8 --heads 2 --layers 1 --epochs 2";
  for (const char* tag : {"a", "b"}) {
    // Same relative paths in both runs; records name their inputs.
    const std::string cd = "cd " + d + tag + " && ";
    fs::create_directories(d + tag);
    const std::vector<std::string> steps = {
        cd + opt.cli + " synth --docs 16 --seed 5 --out s.jsonl",
        cd + opt.cli + " pack s.jsonl --format jsonl --max-len 48 --strategy union --out w",
        cd + opt.cli + " train --windows w --seed 2 --out m.ckpt" + tiny,
        cd + opt.cli + " matrix s.jsonl --format jsonl --max-len 48 --seeds 1 2"
                       " --train-strategies single context --out-dir mx" + tiny};
    for (const auto& s : steps) {
      if (Shell(s) != 0) {
        fs::remove_all(dir);
        return Fail("command failed: " + s);
      }
    }
  }
  const char* files[] = {"/s.jsonl", "/w", "/m.ckpt", "/mx/matrix.csv",
                         "/mx/matrix.txt", "/mx/experiment.json"};
  for (const char* f : files) {
    if (Slurp(d + "a" + f) != Slurp(d + "b" + f) || Slurp(d + "a" + f).empty()) {
      fs::remove_all(dir);
      return Fail(std::string("CLI output ") + f + " differs");
    }
  }
  fs::remove_all(dir);
  return Pass("windows, checkpoints and matrices byte-identical across reruns "
              "(library and CLI)");
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) opt.only.insert(std::stoi(item));
    } else if (arg == "--conll-dir" && i + 1 < argc) {
      opt.conll_dir = argv[++i];
    } else if (arg == "--cli" && i + 1 < argc) {
      opt.cli = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N,...] [--conll-dir DIR] [--cli PATH]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // wall-clock limit, part of the verdict
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "codec round-trip", 10, CodecRoundTrip},
      {2, "packing coverage", 10, PackingCoverage},
      {3, "mask soundness", 30, MaskSoundness},
      {4, "gradient check", 60, GradientCheck},
      {5, "evaluator oracle", 10, EvaluatorOracle},
      {6, "context phenomenon", 30 * 60, Phenomenon},
      {7, "CoNLL 2003 stats", 600, [&] { return ConllStats(opt); }},
      {8, "determinism", 600, [&] { return Determinism(opt); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = Fail(std::string("exception: ") + e.what());
    }
    const double secs = Since(t0);
    if (o.kind == Outcome::kPass && secs >= c.budget_s) {
      o = Fail(o.detail + "; over the " + Fmt("%.0f s", c.budget_s) + " budget");
    }
    const char* tag = o.kind == Outcome::kPass   ? "PASS"
                      : o.kind == Outcome::kSkip ? "SKIP"
                                                 : "FAIL";
    if (o.kind == Outcome::kFail) ++failed;
    std::printf("[%s] %d %s: %s (%.2f s)\n", tag, c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
