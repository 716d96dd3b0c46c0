#include "nerrep/packer.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace nerrep {
namespace {

using nlohmann::json;

void AppendPlans(std::vector<WindowPlan>& out, std::vector<WindowPlan> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
}

std::vector<EncodedWindow> Materialize(const PreparedDocument& doc,
                                       const std::vector<WindowPlan>& plans,
                                       int max_len,
                                       const SubwordVocabulary& vocab) {
  std::vector<EncodedWindow> windows;
  windows.reserve(plans.size());
  for (const auto& plan : plans) {
    windows.push_back(MaterializeWindow(doc, plan, max_len, vocab));
  }
  return windows;
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kSingle:
      return "single";
    case Strategy::kMerged:
      return "merged";
    case Strategy::kContext:
      return "context";
    case Strategy::kUnion:
      return "union";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "single") return Strategy::kSingle;
  if (name == "merged") return Strategy::kMerged;
  if (name == "context") return Strategy::kContext;
  if (name == "union") return Strategy::kUnion;
  throw Error("unknown strategy '" + std::string(name) + "'");
}

void PackerConfig::Validate() const {
  if (max_len < 8) throw Error("max_len must be at least 8");
  if (!(context_budget_fraction > 0.0 && context_budget_fraction <= 1.0)) {
    throw Error("context_budget_fraction must lie in (0, 1]");
  }
}

PreparedDocument PrepareDocument(const Document& document,
                                 const SubwordVocabulary& vocab,
                                 const LabelVocabulary& labels, int max_depth) {
  PreparedDocument doc;
  doc.doc_id = document.doc_id;
  doc.sentence_begin.push_back(0);
  for (size_t s = 0; s < document.sentences.size(); ++s) {
    const Sentence& sentence = document.sentences[s];
    const TokenizedSentence tokenized = TokenizeSentence(vocab, sentence);
    for (int i = 0; i < tokenized.size(); ++i) {
      doc.ids.push_back(tokenized.subtoken_ids[i]);
      doc.sentence_of.push_back(static_cast<int>(s));
      doc.word_of.push_back(tokenized.word_of_subtoken[i]);
      doc.first.push_back(tokenized.is_first_subtoken[i] ? 1 : 0);
    }
    doc.sentence_begin.push_back(doc.length());

    std::vector<int> word_labels;
    word_labels.reserve(sentence.tokens.size());
    for (const auto& label :
         EncodeSentence(sentence.annotations, sentence.size(), max_depth)) {
      const int id = labels.Find(label.ToString());
      word_labels.push_back(id < 0 ? labels.outside_id() : id);
    }
    doc.word_labels.push_back(std::move(word_labels));
  }
  return doc;
}

std::vector<std::pair<int, int>> ChunkSentence(const PreparedDocument& doc,
                                               int sentence, int capacity) {
  const int begin = doc.sentence_begin[sentence];
  const int end = doc.sentence_begin[sentence + 1];
  std::vector<std::pair<int, int>> chunks;
  if (end - begin <= capacity) {
    if (end > begin) chunks.emplace_back(begin, end);
    return chunks;
  }
  int chunk_begin = begin;
  int pos = begin;
  while (pos < end) {
    int word_end = pos + 1;
    while (word_end < end && !doc.first[word_end]) ++word_end;
    const int word_len = word_end - pos;
    if (pos - chunk_begin + word_len <= capacity) {
      pos = word_end;
      continue;
    }
    if (pos > chunk_begin) {
      chunks.emplace_back(chunk_begin, pos);
      chunk_begin = pos;
    }
    if (word_len > capacity) {
      // An oversized word is cut into full chunks; its tail stays open.
      while (word_end - chunk_begin > capacity) {
        chunks.emplace_back(chunk_begin, chunk_begin + capacity);
        chunk_begin += capacity;
      }
    }
    pos = word_end;
  }
  if (pos > chunk_begin) chunks.emplace_back(chunk_begin, pos);
  return chunks;
}

std::vector<WindowPlan> PlanSingle(const PreparedDocument& doc,
                                   const PackerConfig& config) {
  config.Validate();
  std::vector<WindowPlan> plans;
  for (int s = 0; s < doc.sentence_count(); ++s) {
    for (const auto& [b, e] : ChunkSentence(doc, s, config.capacity())) {
      plans.push_back({Strategy::kSingle, b, e, b, e});
    }
  }
  return plans;
}

std::vector<WindowPlan> PlanMerged(const PreparedDocument& doc,
                                   const PackerConfig& config) {
  config.Validate();
  const int capacity = config.capacity();
  std::vector<WindowPlan> plans;
  int open_begin = -1, open_end = -1;
  auto flush = [&] {
    if (open_begin >= 0) {
      plans.push_back(
          {Strategy::kMerged, open_begin, open_end, open_begin, open_end});
    }
    open_begin = open_end = -1;
  };
  for (int s = 0; s < doc.sentence_count(); ++s) {
    const int b = doc.sentence_begin[s];
    const int e = doc.sentence_begin[s + 1];
    if (e == b) continue;
    if (e - b > capacity) {
      flush();
      for (const auto& [cb, ce] : ChunkSentence(doc, s, capacity)) {
        plans.push_back({Strategy::kMerged, cb, ce, cb, ce});
      }
      continue;
    }
    if (open_begin >= 0 && e - open_begin > capacity) flush();
    if (open_begin < 0) open_begin = b;
    open_end = e;
  }
  flush();
  return plans;
}

std::vector<WindowPlan> PlanContext(const PreparedDocument& doc,
                                    const PackerConfig& config) {
  config.Validate();
  const int capacity = config.capacity();
  std::vector<WindowPlan> plans;
  for (int s = 0; s < doc.sentence_count(); ++s) {
    for (const auto& [b, e] : ChunkSentence(doc, s, capacity)) {
      const int remaining = capacity - (e - b);
      const int usable = static_cast<int>(
          std::floor(config.context_budget_fraction * remaining));
      const int available_left = b;
      const int available_right = doc.length() - e;
      int left = std::min(usable / 2, available_left);
      int right = std::min(usable - usable / 2, available_right);
      // Budget one side cannot use moves to the other side.
      int leftover = usable - left - right;
      const int extra_left = std::min(leftover, available_left - left);
      left += extra_left;
      leftover -= extra_left;
      right += std::min(leftover, available_right - right);
      plans.push_back({Strategy::kContext, b - left, e + right, b, e});
    }
  }
  return plans;
}

std::vector<WindowPlan> PlanWindows(const PreparedDocument& doc,
                                    const PackerConfig& config) {
  switch (config.strategy) {
    case Strategy::kSingle:
      return PlanSingle(doc, config);
    case Strategy::kMerged:
      return PlanMerged(doc, config);
    case Strategy::kContext:
      return PlanContext(doc, config);
    case Strategy::kUnion: {
      std::vector<WindowPlan> plans = PlanSingle(doc, config);
      AppendPlans(plans, PlanMerged(doc, config));
      AppendPlans(plans, PlanContext(doc, config));
      return plans;
    }
  }
  return {};
}

EncodedWindow MaterializeWindow(const PreparedDocument& doc,
                                const WindowPlan& plan, int max_len,
                                const SubwordVocabulary& vocab) {
  const int content = plan.visible_end - plan.visible_begin;
  if (content + 2 > max_len) {
    throw Error("window content of " + std::to_string(content) +
                " subtokens exceeds max_len " + std::to_string(max_len));
  }
  EncodedWindow w;
  w.strategy = plan.strategy;
  w.subtoken_ids.assign(max_len, vocab.pad_id());
  w.attention_mask.assign(max_len, 0);
  w.classifier_mask.assign(max_len, 0);
  w.label_ids.assign(max_len, kIgnoreLabel);

  w.subtoken_ids[0] = vocab.bos_id();
  w.attention_mask[0] = 1;
  int pos = 1;
  for (int i = plan.visible_begin; i < plan.visible_end; ++i, ++pos) {
    w.subtoken_ids[pos] = doc.ids[i];
    w.attention_mask[pos] = 1;
    if (i >= plan.target_begin && i < plan.target_end && doc.first[i]) {
      const int s = doc.sentence_of[i];
      const int word = doc.word_of[i];
      w.classifier_mask[pos] = 1;
      w.label_ids[pos] = doc.word_labels[s][word];
      w.provenance.push_back({doc.doc_id, s, word});
    }
  }
  w.subtoken_ids[pos] = vocab.eos_id();
  w.attention_mask[pos] = 1;
  return w;
}

std::vector<EncodedWindow> PackSingle(const PreparedDocument& doc,
                                      const PackerConfig& config,
                                      const SubwordVocabulary& vocab) {
  return Materialize(doc, PlanSingle(doc, config), config.max_len, vocab);
}

std::vector<EncodedWindow> PackMerged(const PreparedDocument& doc,
                                      const PackerConfig& config,
                                      const SubwordVocabulary& vocab) {
  return Materialize(doc, PlanMerged(doc, config), config.max_len, vocab);
}

std::vector<EncodedWindow> PackContext(const PreparedDocument& doc,
                                       const PackerConfig& config,
                                       const SubwordVocabulary& vocab) {
  return Materialize(doc, PlanContext(doc, config), config.max_len, vocab);
}

std::vector<EncodedWindow> PackUnion(const PreparedDocument& doc,
                                     const PackerConfig& config,
                                     const SubwordVocabulary& vocab) {
  PackerConfig c = config;
  c.strategy = Strategy::kUnion;
  return Materialize(doc, PlanWindows(doc, c), config.max_len, vocab);
}

std::vector<EncodedWindow> PackDocument(const Document& document,
                                        const PackerConfig& config,
                                        const SubwordVocabulary& vocab,
                                        const LabelVocabulary& labels) {
  const PreparedDocument doc = PrepareDocument(document, vocab, labels);
  return Materialize(doc, PlanWindows(doc, config), config.max_len, vocab);
}

std::vector<EncodedWindow> PackDataset(const Dataset& dataset,
                                       const PackerConfig& config,
                                       const SubwordVocabulary& vocab,
                                       const LabelVocabulary& labels) {
  std::vector<EncodedWindow> windows;
  for (const auto& document : dataset.documents) {
    auto more = PackDocument(document, config, vocab, labels);
    windows.insert(windows.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
  }
  return windows;
}

CoverageReport CheckCoverage(const std::vector<EncodedWindow>& windows,
                             const Document& document,
                             int expected_multiplicity) {
  std::vector<std::vector<int>> counts(document.sentences.size());
  for (size_t s = 0; s < document.sentences.size(); ++s) {
    counts[s].assign(document.sentences[s].tokens.size(), 0);
  }
  CoverageReport report;
  for (const auto& w : windows) {
    for (const auto& ref : w.provenance) {
      if (ref.doc_id != document.doc_id || ref.sentence < 0 ||
          ref.sentence >= static_cast<int>(counts.size()) || ref.word < 0 ||
          ref.word >= static_cast<int>(counts[ref.sentence].size())) {
        ++report.foreign_entries;
        continue;
      }
      ++counts[ref.sentence][ref.word];
    }
  }
  for (size_t s = 0; s < counts.size(); ++s) {
    for (size_t word = 0; word < counts[s].size(); ++word) {
      if (counts[s][word] != expected_multiplicity) {
        report.violations.push_back(
            {static_cast<int>(s), static_cast<int>(word), counts[s][word]});
      }
    }
  }
  return report;
}

void WriteWindows(const std::vector<EncodedWindow>& windows, std::ostream& out) {
  for (const auto& w : windows) {
    json j;
    j["subtoken_ids"] = w.subtoken_ids;
    json attention = json::array(), classifier = json::array();
    for (auto v : w.attention_mask) attention.push_back(v != 0);
    for (auto v : w.classifier_mask) classifier.push_back(v != 0);
    j["attention_mask"] = std::move(attention);
    j["classifier_mask"] = std::move(classifier);
    j["label_ids"] = w.label_ids;
    json provenance = json::array();
    for (const auto& ref : w.provenance) {
      provenance.push_back(json::array({ref.doc_id, ref.sentence, ref.word}));
    }
    j["provenance"] = std::move(provenance);
    j["strategy_tag"] = std::string(StrategyName(w.strategy));
    out << j.dump() << '\n';
  }
}

std::vector<EncodedWindow> ReadWindows(std::istream& in) {
  std::vector<EncodedWindow> windows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      EncodedWindow w;
      w.subtoken_ids = j.at("subtoken_ids").get<std::vector<int>>();
      for (bool v : j.at("attention_mask")) w.attention_mask.push_back(v);
      for (bool v : j.at("classifier_mask")) w.classifier_mask.push_back(v);
      w.label_ids = j.at("label_ids").get<std::vector<int>>();
      for (const auto& ref : j.at("provenance")) {
        w.provenance.push_back({ref.at(0).get<std::string>(),
                                ref.at(1).get<int>(), ref.at(2).get<int>()});
      }
      w.strategy = ParseStrategy(j.at("strategy_tag").get<std::string>());
      const size_t n = w.subtoken_ids.size();
      if (w.attention_mask.size() != n || w.classifier_mask.size() != n ||
          w.label_ids.size() != n) {
        throw ParseError(line_no, "window fields differ in length");
      }
      size_t active = 0;
      for (size_t i = 0; i < n; ++i) {
        if (w.classifier_mask[i]) {
          ++active;
          if (!w.attention_mask[i]) {
            throw ParseError(line_no, "classifier mask outside attention mask");
          }
        }
      }
      if (active != w.provenance.size()) {
        throw ParseError(line_no, "provenance does not match classifier mask");
      }
      windows.push_back(std::move(w));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return windows;
}

}  // namespace nerrep
