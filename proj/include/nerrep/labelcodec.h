#ifndef NERREP_LABELCODEC_H_
#define NERREP_LABELCODEC_H_

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerrep/corpus.h"

namespace nerrep {

inline constexpr int kDefaultMaxDepth = 4;
inline constexpr char kLabelSeparator = '#';

// One IOB2 tag of a single nesting layer.
struct AtomicLabel {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string category;

  static AtomicLabel Parse(std::string_view text);
  std::string ToString() const;
  bool is_outside() const { return prefix == 'O'; }

  bool operator==(const AtomicLabel&) const = default;
};

// Word-level label made of per-layer tags, outermost layer first, rendered
// as e.g. "I-ORG#B-PER". Trailing outside layers are dropped; a word outside
// every span is the single part "O". An "O" part before a non-outside one
// only occurs as a placeholder under crossing (non-nested) spans.
struct CompositeLabel {
  std::vector<AtomicLabel> parts;

  static CompositeLabel Outside() { return {{AtomicLabel{}}}; }
  static CompositeLabel Parse(std::string_view text);
  std::string ToString() const;

  bool operator==(const CompositeLabel&) const = default;
};

class DepthError : public Error {
 public:
  DepthError(int token, int depth, int max_depth);
  int token() const { return token_; }

 private:
  int token_;
};

// Per-word composite labels for one sentence. Spans are sorted by (length
// descending, start, category) and each goes to the lowest layer where it
// overlaps nothing already placed. Throws DepthError when a span would need
// a layer at or beyond max_depth.
std::vector<CompositeLabel> EncodeSentence(
    const std::vector<Annotation>& annotations, int sentence_length,
    int max_depth = kDefaultMaxDepth);

// Inverse of EncodeSentence, total on arbitrary input. Layers are aligned by
// index (missing layers read as "O") and decoded independently; `I-X` after
// "O" or after another category opens a new span. Returns the normalized set.
std::vector<Annotation> DecodeLabels(const std::vector<CompositeLabel>& labels);
std::vector<Annotation> DecodeLabels(const std::vector<std::string>& labels);

// Sorted set of composite label strings with dense ids. Always holds "O".
class LabelVocabulary {
 public:
  LabelVocabulary();
  explicit LabelVocabulary(std::vector<std::string> labels);

  static LabelVocabulary Build(const Dataset& dataset,
                               int max_depth = kDefaultMaxDepth);
  static LabelVocabulary Load(std::istream& in);
  void Save(std::ostream& out) const;

  int size() const { return static_cast<int>(labels_.size()); }
  int outside_id() const { return outside_id_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int id) const { return labels_.at(id); }
  // Returns -1 when absent.
  int Find(const std::string& label) const;

  bool operator==(const LabelVocabulary& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  int outside_id_ = 0;
};

}  // namespace nerrep

#endif  // NERREP_LABELCODEC_H_
