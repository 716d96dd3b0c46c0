#include "nerrep/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "nerrep/random.h"

namespace nerrep {
namespace {

using nlohmann::json;

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> fields;
  std::istringstream stream{std::string(line)};
  std::string field;
  while (stream >> field) fields.push_back(field);
  return fields;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    const size_t next = line.find('\t', pos);
    fields.emplace_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

struct Tag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string category;
};

Tag ParseTag(const std::string& text, int line) {
  if (text == "O") return {};
  if (text.size() > 2 && (text[0] == 'B' || text[0] == 'I') &&
      text[1] == '-') {
    return Tag{text[0], text.substr(2)};
  }
  throw ParseError(line, "malformed tag '" + text + "'");
}

// Decodes one IOB column. `I-X` after `O` or after another category opens a
// span, which covers both IOB1 input and repair of broken IOB2.
class SpanDecoder {
 public:
  void Push(const Tag& tag, int position) {
    if (tag.prefix == 'O') {
      Close(position);
    } else if (tag.prefix == 'B' || !open_ || category_ != tag.category) {
      Close(position);
      open_ = true;
      category_ = tag.category;
      start_ = position;
    }
  }

  std::vector<Annotation> Finish(int length) {
    Close(length);
    return std::move(spans_);
  }

 private:
  void Close(int position) {
    if (open_) spans_.push_back({category_, start_, position});
    open_ = false;
  }

  bool open_ = false;
  std::string category_;
  int start_ = 0;
  std::vector<Annotation> spans_;
};

// Accumulates sentences for the line-oriented parsers.
class DatasetBuilder {
 public:
  void OpenDocument(std::string id) {
    FlushDocument();
    current_id_ = std::move(id);
    has_document_ = true;
  }

  bool current_empty() const {
    return sentences_.empty() && pending_.tokens.empty();
  }
  bool has_document() const { return has_document_; }

  void AddToken(std::string text) {
    has_document_ = true;
    pending_.tokens.push_back({std::move(text), 0});
  }
  void AddAnnotations(std::vector<Annotation> spans) {
    for (auto& s : spans) pending_.annotations.push_back(std::move(s));
  }
  int pending_length() const { return static_cast<int>(pending_.tokens.size()); }

  void EndSentence() {
    if (pending_.tokens.empty()) return;
    sentences_.push_back(std::move(pending_));
    pending_ = Sentence{};
  }

  Dataset Finish() {
    FlushDocument();
    // Auto-generated ids never collide with explicit ones.
    std::set<std::string> taken;
    for (const auto& d : documents_) {
      if (!d.doc_id.empty()) taken.insert(d.doc_id);
    }
    int counter = 0;
    std::set<std::string> used;
    for (auto& d : documents_) {
      if (d.doc_id.empty()) {
        std::string id;
        do {
          id = "doc-" + std::to_string(counter++);
        } while (taken.count(id));
        d.doc_id = id;
      }
      std::string base = d.doc_id;
      for (int k = 2; used.count(d.doc_id); ++k) {
        d.doc_id = base + "~" + std::to_string(k);
      }
      used.insert(d.doc_id);
    }
    return Dataset::FromDocuments(std::move(documents_));
  }

 private:
  void FlushDocument() {
    EndSentence();
    if (has_document_) {
      documents_.push_back({std::move(current_id_), std::move(sentences_)});
    }
    current_id_.clear();
    sentences_.clear();
    has_document_ = false;
  }

  std::vector<Document> documents_;
  std::string current_id_;
  std::vector<Sentence> sentences_;
  Sentence pending_;
  bool has_document_ = false;
};

// Greedy layer assignment: canonical order, lowest layer without overlap.
std::vector<int> AssignLayers(const std::vector<Annotation>& sorted_spans) {
  std::vector<int> layers(sorted_spans.size(), -1);
  for (size_t i = 0; i < sorted_spans.size(); ++i) {
    for (int layer = 0;; ++layer) {
      bool clash = false;
      for (size_t j = 0; j < i && !clash; ++j) {
        clash = layers[j] == layer && sorted_spans[j].Overlaps(sorted_spans[i]);
      }
      if (!clash) {
        layers[i] = layer;
        break;
      }
    }
  }
  return layers;
}

}  // namespace

bool AnnotationLess(const Annotation& a, const Annotation& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end > b.end;
  return a.category < b.category;
}

void NormalizeAnnotations(std::vector<Annotation>& annotations) {
  std::sort(annotations.begin(), annotations.end(), AnnotationLess);
  annotations.erase(std::unique(annotations.begin(), annotations.end()),
                    annotations.end());
}

Dataset Dataset::FromDocuments(std::vector<Document> documents) {
  Dataset dataset;
  std::set<std::string> categories;
  std::set<std::string> ids;
  for (auto& doc : documents) {
    if (!ids.insert(doc.doc_id).second) {
      throw Error("duplicate doc_id '" + doc.doc_id + "'");
    }
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      Sentence& sentence = doc.sentences[s];
      sentence.sent_index = static_cast<int>(s);
      for (size_t w = 0; w < sentence.tokens.size(); ++w) {
        if (sentence.tokens[w].text.empty()) {
          throw Error("empty token in document '" + doc.doc_id + "'");
        }
        sentence.tokens[w].word_index = static_cast<int>(w);
      }
      for (const auto& a : sentence.annotations) {
        if (a.category.empty() || a.start < 0 || a.start >= a.end ||
            a.end > sentence.size()) {
          throw Error("annotation out of bounds in document '" + doc.doc_id +
                      "', sentence " + std::to_string(s));
        }
        categories.insert(a.category);
      }
      NormalizeAnnotations(sentence.annotations);
    }
  }
  dataset.documents = std::move(documents);
  dataset.categories.assign(categories.begin(), categories.end());
  return dataset;
}

size_t Dataset::sentence_count() const {
  size_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

CorpusStats ComputeStats(const Dataset& dataset) {
  CorpusStats stats;
  for (const auto& doc : dataset.documents) {
    for (const auto& sentence : doc.sentences) {
      ++stats.sentence_count;
      stats.token_count += sentence.size();
      stats.annotation_count += static_cast<int64_t>(sentence.annotations.size());
    }
  }
  stats.category_count = static_cast<int64_t>(dataset.categories.size());
  return stats;
}

Dataset ParseConll2003(std::istream& in) {
  DatasetBuilder builder;
  SpanDecoder decoder;
  std::string line;
  int line_no = 0;
  auto end_sentence = [&] {
    builder.AddAnnotations(decoder.Finish(builder.pending_length()));
    decoder = SpanDecoder{};
    builder.EndSentence();
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = SplitWhitespace(line);
    if (fields.empty()) {
      end_sentence();
      continue;
    }
    if (fields[0] == "-DOCSTART-") {
      end_sentence();
      builder.OpenDocument("");
      continue;
    }
    if (fields.size() < 2) {
      throw ParseError(line_no, "expected at least two columns");
    }
    decoder.Push(ParseTag(fields.back(), line_no), builder.pending_length());
    builder.AddToken(fields[0]);
  }
  end_sentence();
  return builder.Finish();
}

void WriteConll2003(const Dataset& dataset, std::ostream& out) {
  for (const auto& doc : dataset.documents) {
    out << "-DOCSTART- O\n\n";
    for (const auto& sentence : doc.sentences) {
      std::vector<std::string> tags(sentence.tokens.size(), "O");
      for (const auto& a : sentence.annotations) {
        for (int t = a.start; t < a.end; ++t) {
          if (tags[t] != "O") {
            throw Error("overlapping annotations cannot be written as CoNLL");
          }
          tags[t] = (t == a.start ? "B-" : "I-") + a.category;
        }
      }
      for (size_t t = 0; t < tags.size(); ++t) {
        out << sentence.tokens[t].text << ' ' << tags[t] << '\n';
      }
      out << '\n';
    }
  }
}

Dataset ParseNestedTsv(std::istream& in, int n_layers) {
  if (n_layers < 1) throw Error("n_layers must be positive");
  DatasetBuilder builder;
  std::vector<SpanDecoder> decoders(n_layers);
  std::string line;
  int line_no = 0;
  auto end_sentence = [&] {
    for (auto& d : decoders) {
      builder.AddAnnotations(d.Finish(builder.pending_length()));
      d = SpanDecoder{};
    }
    builder.EndSentence();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) {
      end_sentence();
      continue;
    }
    if (line[0] == '#') {
      end_sentence();
      std::string_view text = Trim(std::string_view(line).substr(1));
      constexpr std::string_view kDocId = "doc_id";
      bool explicit_id = false;
      if (text.substr(0, kDocId.size()) == kDocId) {
        std::string_view rest = Trim(text.substr(kDocId.size()));
        if (!rest.empty() && (rest[0] == '=' || rest[0] == ':')) {
          text = Trim(rest.substr(1));
          explicit_id = true;
        }
      }
      if (explicit_id || !builder.has_document() || !builder.current_empty()) {
        builder.OpenDocument(std::string(text));
      }
      continue;
    }
    const auto fields = SplitTabs(line);
    if (static_cast<int>(fields.size()) != n_layers + 1) {
      throw ParseError(line_no, "expected " + std::to_string(n_layers + 1) +
                                    " tab-separated columns, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty token");
    const int position = builder.pending_length();
    for (int k = 0; k < n_layers; ++k) {
      decoders[k].Push(ParseTag(fields[k + 1], line_no), position);
    }
    builder.AddToken(fields[0]);
  }
  end_sentence();
  return builder.Finish();
}

void WriteNestedTsv(const Dataset& dataset, int n_layers, std::ostream& out) {
  for (const auto& doc : dataset.documents) {
    out << "# doc_id = " << doc.doc_id << '\n';
    for (const auto& sentence : doc.sentences) {
      std::vector<Annotation> spans = sentence.annotations;
      std::sort(spans.begin(), spans.end(),
                [](const Annotation& a, const Annotation& b) {
                  if (a.length() != b.length()) return a.length() > b.length();
                  if (a.start != b.start) return a.start < b.start;
                  return a.category < b.category;
                });
      const auto layers = AssignLayers(spans);
      std::vector<std::vector<std::string>> tags(
          sentence.tokens.size(), std::vector<std::string>(n_layers, "O"));
      for (size_t i = 0; i < spans.size(); ++i) {
        if (layers[i] >= n_layers) {
          throw Error("document '" + doc.doc_id + "' needs more than " +
                      std::to_string(n_layers) + " layers");
        }
        for (int t = spans[i].start; t < spans[i].end; ++t) {
          tags[t][layers[i]] = (t == spans[i].start ? "B-" : "I-") +
                               spans[i].category;
        }
      }
      for (size_t t = 0; t < tags.size(); ++t) {
        out << sentence.tokens[t].text;
        for (const auto& tag : tags[t]) out << '\t' << tag;
        out << '\n';
      }
      out << '\n';
    }
  }
}

Dataset ReadJsonl(std::istream& in) {
  std::vector<Document> documents;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Document doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      for (const auto& js : j.at("sentences")) {
        Sentence sentence;
        for (const auto& tok : js.at("tokens")) {
          sentence.tokens.push_back({tok.get<std::string>(), 0});
        }
        for (const auto& ja : js.at("annotations")) {
          sentence.annotations.push_back({ja.at("category").get<std::string>(),
                                          ja.at("start").get<int>(),
                                          ja.at("end").get<int>()});
        }
        doc.sentences.push_back(std::move(sentence));
      }
      documents.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    return Dataset::FromDocuments(std::move(documents));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

void WriteJsonl(const Dataset& dataset, std::ostream& out) {
  for (const auto& doc : dataset.documents) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["sentences"] = json::array();
    for (const auto& sentence : doc.sentences) {
      json js;
      js["tokens"] = json::array();
      for (const auto& t : sentence.tokens) js["tokens"].push_back(t.text);
      js["annotations"] = json::array();
      for (const auto& a : sentence.annotations) {
        js["annotations"].push_back(
            {{"category", a.category}, {"start", a.start}, {"end", a.end}});
      }
      j["sentences"].push_back(std::move(js));
    }
    out << j.dump() << '\n';
  }
}

CorpusFormat ParseCorpusFormat(const std::string& name) {
  if (name == "conll" || name == "conll2003") return CorpusFormat::kConll2003;
  if (name == "nested" || name == "tsv") return CorpusFormat::kNestedTsv;
  if (name == "jsonl" || name == "json") return CorpusFormat::kJsonl;
  throw Error("unknown corpus format '" + name + "'");
}

Dataset LoadCorpus(const std::vector<std::string>& paths, CorpusFormat format,
                   int n_layers) {
  std::vector<Dataset> parts;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
      switch (format) {
        case CorpusFormat::kConll2003:
          parts.push_back(ParseConll2003(in));
          break;
        case CorpusFormat::kNestedTsv:
          parts.push_back(ParseNestedTsv(in, n_layers));
          break;
        case CorpusFormat::kJsonl:
          parts.push_back(ReadJsonl(in));
          break;
      }
    } catch (const ParseError& e) {
      throw ParseError(e.line(), path + ": " + e.what());
    }
    if (paths.size() > 1) {
      const std::string stem = std::filesystem::path(path).stem().string();
      for (auto& doc : parts.back().documents) {
        doc.doc_id = stem + ":" + doc.doc_id;
      }
    }
  }
  return Concatenate(parts);
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& dataset,
                                         double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train_fraction must lie in (0, 1)");
  }
  const size_t n = dataset.documents.size();
  if (n < 2) throw Error("cannot split a dataset with fewer than 2 documents");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Random rng(seed);
  rng.Shuffle(order);

  const auto train_count = static_cast<size_t>(std::floor(train_fraction * n));
  const bool train_first = train_fraction >= 0.5;
  const size_t cut = train_first ? train_count : n - train_count;

  std::vector<Document> head, tail;
  for (size_t i = 0; i < n; ++i) {
    (i < cut ? head : tail).push_back(dataset.documents[order[i]]);
  }
  Dataset first = Dataset::FromDocuments(std::move(head));
  Dataset second = Dataset::FromDocuments(std::move(tail));
  if (train_first) return {std::move(first), std::move(second)};
  return {std::move(second), std::move(first)};
}

Dataset Concatenate(const std::vector<Dataset>& parts) {
  std::vector<Document> documents;
  for (const auto& part : parts) {
    documents.insert(documents.end(), part.documents.begin(),
                     part.documents.end());
  }
  return Dataset::FromDocuments(std::move(documents));
}

}  // namespace nerrep
