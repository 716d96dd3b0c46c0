#include "nerrep/labelcodec.h"

#include <algorithm>
#include <set>

namespace nerrep {

AtomicLabel AtomicLabel::Parse(std::string_view text) {
  if (text == "O") return {};
  if (text.size() > 2 && (text[0] == 'B' || text[0] == 'I') && text[1] == '-') {
    return {text[0], std::string(text.substr(2))};
  }
  throw Error("malformed label part '" + std::string(text) + "'");
}

std::string AtomicLabel::ToString() const {
  if (prefix == 'O') return "O";
  return std::string(1, prefix) + "-" + category;
}

CompositeLabel CompositeLabel::Parse(std::string_view text) {
  CompositeLabel label;
  size_t pos = 0;
  while (true) {
    const size_t next = text.find(kLabelSeparator, pos);
    label.parts.push_back(AtomicLabel::Parse(text.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return label;
}

std::string CompositeLabel::ToString() const {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += kLabelSeparator;
    out += parts[i].ToString();
  }
  return out.empty() ? "O" : out;
}

DepthError::DepthError(int token, int depth, int max_depth)
    : Error("nesting depth " + std::to_string(depth) + " at token " +
            std::to_string(token) + " exceeds maximum " +
            std::to_string(max_depth)),
      token_(token) {}

std::vector<CompositeLabel> EncodeSentence(
    const std::vector<Annotation>& annotations, int sentence_length,
    int max_depth) {
  std::vector<Annotation> spans = annotations;
  for (const auto& a : spans) {
    if (a.start < 0 || a.start >= a.end || a.end > sentence_length) {
      throw Error("annotation [" + std::to_string(a.start) + ", " +
                  std::to_string(a.end) + ") outside sentence of length " +
                  std::to_string(sentence_length));
    }
  }
  std::sort(spans.begin(), spans.end(),
            [](const Annotation& a, const Annotation& b) {
              if (a.length() != b.length()) return a.length() > b.length();
              if (a.start != b.start) return a.start < b.start;
              return a.category < b.category;
            });
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());

  // occupied[layer][token]
  std::vector<std::vector<AtomicLabel>> layers;
  for (const auto& span : spans) {
    size_t layer = 0;
    for (; layer < layers.size(); ++layer) {
      bool free = true;
      for (int t = span.start; t < span.end && free; ++t) {
        free = layers[layer][t].is_outside();
      }
      if (free) break;
    }
    if (static_cast<int>(layer) >= max_depth) {
      throw DepthError(span.start, static_cast<int>(layer) + 1, max_depth);
    }
    if (layer == layers.size()) {
      layers.emplace_back(sentence_length);
    }
    for (int t = span.start; t < span.end; ++t) {
      layers[layer][t] = {t == span.start ? 'B' : 'I', span.category};
    }
  }

  std::vector<CompositeLabel> out(sentence_length);
  for (int t = 0; t < sentence_length; ++t) {
    size_t depth = 0;
    for (size_t k = 0; k < layers.size(); ++k) {
      if (!layers[k][t].is_outside()) depth = k + 1;
    }
    if (depth == 0) {
      out[t] = CompositeLabel::Outside();
      continue;
    }
    for (size_t k = 0; k < depth; ++k) out[t].parts.push_back(layers[k][t]);
  }
  return out;
}

std::vector<Annotation> DecodeLabels(const std::vector<CompositeLabel>& labels) {
  size_t depth = 0;
  for (const auto& l : labels) depth = std::max(depth, l.parts.size());
  const int n = static_cast<int>(labels.size());
  static const AtomicLabel kOutside;

  std::vector<Annotation> spans;
  for (size_t k = 0; k < depth; ++k) {
    bool open = false;
    Annotation current;
    for (int t = 0; t <= n; ++t) {
      const AtomicLabel& part =
          t < n && k < labels[t].parts.size() ? labels[t].parts[k] : kOutside;
      const bool continues =
          open && part.prefix == 'I' && part.category == current.category;
      if (continues) continue;
      if (open) {
        current.end = t;
        spans.push_back(current);
        open = false;
      }
      if (!part.is_outside()) {
        open = true;
        current = {part.category, t, t};
      }
    }
  }
  NormalizeAnnotations(spans);
  return spans;
}

std::vector<Annotation> DecodeLabels(const std::vector<std::string>& labels) {
  std::vector<CompositeLabel> parsed;
  parsed.reserve(labels.size());
  for (const auto& l : labels) parsed.push_back(CompositeLabel::Parse(l));
  return DecodeLabels(parsed);
}

LabelVocabulary::LabelVocabulary() : LabelVocabulary(std::vector<std::string>{}) {}

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels) {
  labels.push_back("O");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  labels_ = std::move(labels);
  for (size_t i = 0; i < labels_.size(); ++i) {
    index_.emplace(labels_[i], static_cast<int>(i));
  }
  outside_id_ = index_.at("O");
}

LabelVocabulary LabelVocabulary::Build(const Dataset& dataset, int max_depth) {
  std::set<std::string> labels;
  for (const auto& doc : dataset.documents) {
    for (const auto& sentence : doc.sentences) {
      for (const auto& l :
           EncodeSentence(sentence.annotations, sentence.size(), max_depth)) {
        labels.insert(l.ToString());
      }
    }
  }
  return LabelVocabulary({labels.begin(), labels.end()});
}

LabelVocabulary LabelVocabulary::Load(std::istream& in) {
  std::vector<std::string> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      CompositeLabel::Parse(line);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    labels.push_back(line);
  }
  return LabelVocabulary(std::move(labels));
}

void LabelVocabulary::Save(std::ostream& out) const {
  for (const auto& l : labels_) out << l << '\n';
}

int LabelVocabulary::Find(const std::string& label) const {
  const auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

}  // namespace nerrep
