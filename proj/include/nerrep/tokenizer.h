#ifndef NERREP_TOKENIZER_H_
#define NERREP_TOKENIZER_H_

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerrep/corpus.h"

namespace nerrep {

// Piece inventory for greedy longest-match subword tokenization. Ids are the
// line numbers of the vocabulary file. The file must contain the four
// special pieces [PAD], [UNK], [BOS] and [EOS].
class SubwordVocabulary {
 public:
  static constexpr std::string_view kPad = "[PAD]";
  static constexpr std::string_view kUnk = "[UNK]";
  static constexpr std::string_view kBos = "[BOS]";
  static constexpr std::string_view kEos = "[EOS]";

  static SubwordVocabulary Load(std::istream& in,
                                std::string continuation_marker = "##");
  static SubwordVocabulary FromPieces(std::vector<std::string> pieces,
                                      std::string continuation_marker = "##");

  // Vocabulary with the specials, every word of the dataset as a whole
  // piece, and every character as both an initial and a continuation piece.
  static SubwordVocabulary BuildFromDataset(const Dataset& dataset,
                                            bool include_words = true);

  void Save(std::ostream& out) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int bos_id() const { return bos_id_; }
  int eos_id() const { return eos_id_; }
  const std::string& continuation_marker() const { return marker_; }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& piece(int id) const { return pieces_.at(id); }

  // Returns -1 when the piece is absent.
  int Find(std::string_view piece) const;

  // Greedy longest match from the left. Non-initial pieces carry the
  // continuation marker. If nothing matches at some offset the whole word
  // becomes [UNK].
  std::vector<int> TokenizeWord(std::string_view word) const;

 private:
  SubwordVocabulary() = default;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  std::string marker_;
  size_t longest_piece_ = 0;
  int pad_id_ = -1, unk_id_ = -1, bos_id_ = -1, eos_id_ = -1;
};

struct TokenizedSentence {
  std::vector<int> subtoken_ids;
  std::vector<int> word_of_subtoken;
  std::vector<bool> is_first_subtoken;

  int size() const { return static_cast<int>(subtoken_ids.size()); }
};

TokenizedSentence TokenizeSentence(const SubwordVocabulary& vocab,
                                   const Sentence& sentence);

}  // namespace nerrep

#endif  // NERREP_TOKENIZER_H_
