#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <fstream>

#include "tradrank/error.hpp"
#include "tradrank/textproc.hpp"

namespace tradrank {

WordPieceVocab::WordPieceVocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    ids_.emplace(pieces_[i], i);  // first occurrence wins
  }
}

WordPieceVocab WordPieceVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open word-piece vocabulary " + path);
  }
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    pieces.push_back(line);
  }
  return WordPieceVocab(std::move(pieces));
}

bool WordPieceVocab::contains(std::string_view piece) const {
  return ids_.find(std::string(piece)) != ids_.end();
}

std::optional<std::size_t> WordPieceVocab::id(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) {
    return std::nullopt;
  }
  return it->second;
}

namespace {

// Byte offsets of each code point boundary in a UTF-8 word, including the end.
std::vector<std::size_t> code_point_boundaries(std::string_view word) {
  std::vector<std::size_t> bounds;
  const auto* s = reinterpret_cast<const uint8_t*>(word.data());
  const auto len = static_cast<int32_t>(word.size());
  int32_t i = 0;
  while (i < len) {
    bounds.push_back(static_cast<std::size_t>(i));
    UChar32 c = 0;
    U8_NEXT(s, i, len, c);
  }
  bounds.push_back(word.size());
  return bounds;
}

void split_word(std::string_view word, const WordPieceVocab& vocab, Tokens& out) {
  const auto bounds = code_point_boundaries(word);
  const std::size_t chars = bounds.size() - 1;
  if (chars > WordPieceVocab::kMaxWordChars) {
    out.emplace_back(WordPieceVocab::kUnknown);
    return;
  }
  Tokens pieces;
  std::size_t start = 0;
  while (start < chars) {
    std::size_t end = chars;
    std::string match;
    while (end > start) {
      std::string candidate(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (start > 0) {
        candidate.insert(0, "##");
      }
      if (vocab.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      --end;
    }
    if (match.empty()) {
      out.emplace_back(WordPieceVocab::kUnknown);
      return;
    }
    pieces.push_back(std::move(match));
    start = end;
  }
  for (auto& piece : pieces) {
    out.push_back(std::move(piece));
  }
}

}  // namespace

Tokens tokenize_wordpiece(std::string_view text, const WordPieceVocab& vocab) {
  const std::string folded = normalize_and_fold(text);
  Tokens out;
  const auto* s = reinterpret_cast<const uint8_t*>(folded.data());
  const auto len = static_cast<int32_t>(folded.size());
  int32_t i = 0;
  int32_t word_start = -1;
  while (i < len) {
    const int32_t pos = i;
    UChar32 c = 0;
    U8_NEXT(s, i, len, c);
    if (u_isUWhiteSpace(c)) {
      if (word_start >= 0) {
        split_word(std::string_view(folded).substr(word_start, pos - word_start), vocab, out);
        word_start = -1;
      }
    } else if (word_start < 0) {
      word_start = pos;
    }
  }
  if (word_start >= 0) {
    split_word(std::string_view(folded).substr(word_start), vocab, out);
  }
  return out;
}

}  // namespace tradrank
