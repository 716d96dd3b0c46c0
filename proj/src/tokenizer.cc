#include "nerrep/tokenizer.h"

#include <algorithm>
#include <set>

namespace nerrep {
namespace {

// Length in bytes of the UTF-8 sequence starting with `lead`.
size_t Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

std::vector<size_t> CodepointBoundaries(std::string_view word) {
  std::vector<size_t> bounds;
  for (size_t i = 0; i < word.size();) {
    bounds.push_back(i);
    i += std::min(Utf8Length(static_cast<unsigned char>(word[i])),
                  word.size() - i);
  }
  bounds.push_back(word.size());
  return bounds;
}

}  // namespace

SubwordVocabulary SubwordVocabulary::FromPieces(std::vector<std::string> pieces,
                                                std::string continuation_marker) {
  if (pieces.empty()) throw Error("empty vocabulary");
  SubwordVocabulary vocab;
  vocab.marker_ = std::move(continuation_marker);
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].empty()) {
      throw ParseError(static_cast<int>(i) + 1, "empty vocabulary piece");
    }
    if (!vocab.index_.emplace(pieces[i], static_cast<int>(i)).second) {
      throw ParseError(static_cast<int>(i) + 1,
                       "duplicate vocabulary piece '" + pieces[i] + "'");
    }
    vocab.longest_piece_ = std::max(vocab.longest_piece_, pieces[i].size());
  }
  vocab.pieces_ = std::move(pieces);
  auto special = [&](std::string_view name) {
    const int id = vocab.Find(name);
    if (id < 0) {
      throw Error("vocabulary lacks special piece " + std::string(name));
    }
    return id;
  };
  vocab.pad_id_ = special(kPad);
  vocab.unk_id_ = special(kUnk);
  vocab.bos_id_ = special(kBos);
  vocab.eos_id_ = special(kEos);
  return vocab;
}

SubwordVocabulary SubwordVocabulary::Load(std::istream& in,
                                          std::string continuation_marker) {
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return FromPieces(std::move(pieces), std::move(continuation_marker));
}

SubwordVocabulary SubwordVocabulary::BuildFromDataset(const Dataset& dataset,
                                                      bool include_words) {
  std::set<std::string> words;
  std::set<std::string> chars;
  for (const auto& doc : dataset.documents) {
    for (const auto& sentence : doc.sentences) {
      for (const auto& token : sentence.tokens) {
        if (include_words) words.insert(token.text);
        const auto bounds = CodepointBoundaries(token.text);
        for (size_t i = 0; i + 1 < bounds.size(); ++i) {
          chars.insert(token.text.substr(bounds[i], bounds[i + 1] - bounds[i]));
        }
      }
    }
  }
  std::vector<std::string> pieces = {std::string(kPad), std::string(kUnk),
                                     std::string(kBos), std::string(kEos)};
  std::set<std::string> seen(pieces.begin(), pieces.end());
  auto add = [&](const std::string& p) {
    if (seen.insert(p).second) pieces.push_back(p);
  };
  for (const auto& c : chars) add(c);
  for (const auto& c : chars) add("##" + c);
  for (const auto& w : words) add(w);
  return FromPieces(std::move(pieces));
}

void SubwordVocabulary::Save(std::ostream& out) const {
  for (const auto& p : pieces_) out << p << '\n';
}

int SubwordVocabulary::Find(std::string_view piece) const {
  const auto it = index_.find(std::string(piece));
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> SubwordVocabulary::TokenizeWord(std::string_view word) const {
  std::vector<int> ids;
  if (word.empty()) return ids;
  const auto bounds = CodepointBoundaries(word);
  size_t b = 0;  // index into bounds of the current offset
  std::string candidate;
  while (bounds[b] < word.size()) {
    int match = -1;
    size_t match_end = b;
    for (size_t e = bounds.size() - 1; e > b; --e) {
      const size_t len = bounds[e] - bounds[b];
      if (len > longest_piece_) continue;
      candidate.clear();
      if (b > 0) candidate = marker_;
      candidate.append(word.substr(bounds[b], len));
      const auto it = index_.find(candidate);
      if (it != index_.end()) {
        match = it->second;
        match_end = e;
        break;
      }
    }
    if (match < 0) return {unk_id_};
    ids.push_back(match);
    b = match_end;
  }
  return ids;
}

TokenizedSentence TokenizeSentence(const SubwordVocabulary& vocab,
                                   const Sentence& sentence) {
  TokenizedSentence out;
  for (int w = 0; w < sentence.size(); ++w) {
    const auto ids = vocab.TokenizeWord(sentence.tokens[w].text);
    for (size_t i = 0; i < ids.size(); ++i) {
      out.subtoken_ids.push_back(ids[i]);
      out.word_of_subtoken.push_back(w);
      out.is_first_subtoken.push_back(i == 0);
    }
  }
  return out;
}

}  // namespace nerrep
