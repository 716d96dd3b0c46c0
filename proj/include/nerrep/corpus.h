#ifndef NERREP_CORPUS_H_
#define NERREP_CORPUS_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nerrep/errors.h"

namespace nerrep {

struct Token {
  std::string text;
  int word_index = 0;

  bool operator==(const Token&) const = default;
};

// A labelled token span [start, end) inside one sentence.
struct Annotation {
  std::string category;
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool Contains(int token) const { return token >= start && token < end; }
  bool Overlaps(const Annotation& other) const {
    return start < other.end && other.start < end;
  }

  bool operator==(const Annotation&) const = default;
};

// Canonical annotation order: by start, longer spans first, then category.
bool AnnotationLess(const Annotation& a, const Annotation& b);

// Sorts annotations canonically and drops exact duplicates.
void NormalizeAnnotations(std::vector<Annotation>& annotations);

struct Sentence {
  std::vector<Token> tokens;
  int sent_index = 0;
  std::vector<Annotation> annotations;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;
};

struct Dataset {
  std::vector<Document> documents;
  std::vector<std::string> categories;  // sorted, unique

  // Builds a dataset from documents, renumbering sentence and word indices,
  // normalizing annotations and recomputing the category set. Throws Error
  // when an annotation is out of bounds or a doc_id repeats.
  static Dataset FromDocuments(std::vector<Document> documents);

  size_t sentence_count() const;
  bool operator==(const Dataset&) const = default;
};

struct CorpusStats {
  int64_t sentence_count = 0;
  int64_t token_count = 0;
  int64_t annotation_count = 0;
  int64_t category_count = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats ComputeStats(const Dataset& dataset);

// CoNLL 2003 column text. The last whitespace-separated column holds an
// IOB1 or IOB2 tag; `-DOCSTART-` lines open a new document and blank lines
// end sentences. Without any `-DOCSTART-` the file is a single document.
Dataset ParseConll2003(std::istream& in);

// Writes flat annotations as IOB2 tags, one `token tag` pair per line.
// Throws Error on overlapping annotations.
void WriteConll2003(const Dataset& dataset, std::ostream& out);

// Tab-separated nested format: token followed by n_layers IOB2 columns.
// A `# doc_id = X` line always opens document X. Any other `#` line opens a
// new document named by its text, unless the current document is still
// empty, in which case the comment is ignored.
Dataset ParseNestedTsv(std::istream& in, int n_layers);

// Writes annotations distributed over n_layers columns, outermost spans on
// the lowest layer. Throws Error when a sentence needs more layers.
void WriteNestedTsv(const Dataset& dataset, int n_layers, std::ostream& out);

// Canonical JSON lines: one document per line.
Dataset ReadJsonl(std::istream& in);
void WriteJsonl(const Dataset& dataset, std::ostream& out);

enum class CorpusFormat { kConll2003, kNestedTsv, kJsonl };

CorpusFormat ParseCorpusFormat(const std::string& name);

// Reads and concatenates several files of one format.
Dataset LoadCorpus(const std::vector<std::string>& paths, CorpusFormat format,
                   int n_layers = 2);

// Partitions whole documents. The train part holds floor(fraction * N)
// documents. Documents are permuted by the seed; the larger part is cut from
// the front of the permutation, so split(f) and split(1 - f) with one seed
// return the same two blocks with roles swapped.
std::pair<Dataset, Dataset> SplitDataset(const Dataset& dataset,
                                         double train_fraction, uint64_t seed);

// Union of several datasets. Doc ids must stay unique.
Dataset Concatenate(const std::vector<Dataset>& parts);

}  // namespace nerrep

#endif  // NERREP_CORPUS_H_
