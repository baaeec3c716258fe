#include "tradrank/textproc.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>

#include "tradrank/error.hpp"

namespace tradrank {

std::string_view to_string(Attribute attr) {
  switch (attr) {
    case Attribute::url: return "url";
    case Attribute::title: return "title";
    case Attribute::body: return "body";
  }
  return "body";
}

std::string_view to_string(ViewSource source) {
  switch (source) {
    case ViewSource::url: return "url";
    case ViewSource::title: return "title";
    case ViewSource::body: return "body";
    case ViewSource::all: return "all";
  }
  return "body";
}

std::optional<ViewSource> parse_view_source(std::string_view text) {
  if (text == "url") return ViewSource::url;
  if (text == "title") return ViewSource::title;
  if (text == "body") return ViewSource::body;
  if (text == "all") return ViewSource::all;
  return std::nullopt;
}

void validate_view_specs(const std::vector<FieldViewSpec>& specs) {
  std::unordered_set<std::string> seen;
  for (const auto& spec : specs) {
    if (spec.view_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "empty view_id");
    }
    if (spec.scheme == Scheme::wordpiece && (spec.lemmatize || spec.stop)) {
      throw Error(ErrorCode::InvalidArgument,
                  "word-piece view '" + spec.view_id + "' cannot be lemmatized or stopped");
    }
    if (!seen.insert(spec.view_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate view_id '" + spec.view_id + "'");
    }
  }
}

std::vector<FieldViewSpec> default_view_specs() {
  return {
      {ViewSource::url, Scheme::word, true, true, "url.lemm"},
      {ViewSource::title, Scheme::word, true, true, "title.lemm"},
      {ViewSource::body, Scheme::word, true, true, "body.lemm"},
      {ViewSource::url, Scheme::word, false, false, "url.rawtok"},
      {ViewSource::title, Scheme::word, false, false, "title.rawtok"},
      {ViewSource::body, Scheme::word, false, false, "body.rawtok"},
      {ViewSource::body, Scheme::wordpiece, false, false, "body.wp"},
      {ViewSource::all, Scheme::word, true, true, "all.lemm"},
  };
}

namespace {

icu::UnicodeString to_nfc(std::string_view text) {
  // fromUTF8 substitutes U+FFFD for ill-formed sequences.
  icu::UnicodeString raw = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    return raw;
  }
  icu::UnicodeString out = nfc->normalize(raw, status);
  return U_FAILURE(status) ? raw : out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) {
    out.append(buf, static_cast<std::size_t>(len));
  }
}

bool is_token_char(UChar32 c, bool inside_token) {
  if (u_isalnum(c)) {
    return true;
  }
  // Combining marks that survive NFC stay attached to the preceding letter.
  if (inside_token) {
    const int8_t type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
  }
  return false;
}

// Iterates the folded code points of text after NFC normalization.
template <typename Fn>
void for_each_folded(std::string_view text, Fn&& fn) {
  const icu::UnicodeString nfc = to_nfc(text);
  for (int32_t i = 0; i < nfc.length();) {
    const UChar32 c = nfc.char32At(i);
    fn(u_foldCase(c, U_FOLD_CASE_DEFAULT));
    i += U16_LENGTH(c);
  }
}

}  // namespace

std::string normalize_and_fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for_each_folded(text, [&](UChar32 c) { append_utf8(out, c); });
  return out;
}

Tokens tokenize_word(std::string_view text) {
  Tokens tokens;
  std::string current;
  for_each_folded(text, [&](UChar32 c) {
    if (is_token_char(c, !current.empty())) {
      append_utf8(current, c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  });
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

namespace {

bool starts_with_nocase(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) {
    return false;
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>(c - 'A' + 'a');
    }
    if (c != prefix[i]) {
      return false;
    }
  }
  return true;
}

bool is_url_separator(char c) {
  switch (c) {
    case '/': case '.': case '-': case '_': case '?': case '&': case '=':
    case '#': case '%': case ':': case ';': case ',': case '+': case '~':
    case '!': case '@': case '$': case '*': case '(': case ')': case '\'':
    case '"': case '[': case ']': case '|': case '\\': case '<': case '>':
    case '^': case '`': case '{': case '}':
      return true;
    default:
      return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
}

}  // namespace

std::string preprocess_url(std::string_view url) {
  for (std::string_view scheme : {"https://", "http://"}) {
    if (starts_with_nocase(url, scheme)) {
      url.remove_prefix(scheme.size());
      break;
    }
  }
  if (starts_with_nocase(url, "www.")) {
    url.remove_prefix(4);
  }
  std::string out;
  out.reserve(url.size());
  bool pending_space = false;
  for (char c : url) {
    if (is_url_separator(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

Tokens remove_stopwords(const Tokens& tokens, const Stoplist& stoplist) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (!stoplist.contains(token)) {
      out.push_back(token);
    }
  }
  return out;
}

const Stoplist& default_stoplist() {
  static const Stoplist list = {
      "a",    "an",   "and",  "are",  "as",   "at",    "be",   "but",  "by",
      "do",   "for",  "from", "have", "he",   "how",   "i",    "if",   "in",
      "into", "is",   "it",   "its",  "of",   "on",    "or",   "she",  "that",
      "the",  "their", "they", "this", "to",  "was",   "we",   "were", "what",
      "when", "which", "who",  "will", "with", "you",
  };
  return list;
}

Stoplist load_stoplist(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open stoplist " + path);
  }
  Stoplist list;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) {
      list.insert(normalize_and_fold(line));
    }
  }
  return list;
}

namespace {

Tokens tokenize_for_spec(std::string_view text, const FieldViewSpec& spec,
                         const Stoplist& stoplist, const WordPieceVocab* vocab) {
  if (spec.scheme == Scheme::wordpiece) {
    if (vocab == nullptr) {
      throw Error(ErrorCode::MissingVocabulary,
                  "view '" + spec.view_id + "' needs a word-piece vocabulary");
    }
    return tokenize_wordpiece(text, *vocab);
  }
  Tokens tokens = tokenize_word(text);
  if (spec.lemmatize) {
    tokens = lemmatize(tokens);
  }
  if (spec.stop) {
    tokens = remove_stopwords(tokens, stoplist);
  }
  return tokens;
}

}  // namespace

TokenSequence build_view(const RawAttribute& attr, const FieldViewSpec& spec,
                         const Stoplist& stoplist, const WordPieceVocab* vocab) {
  const bool matches = (spec.source == ViewSource::url && attr.name == Attribute::url) ||
                       (spec.source == ViewSource::title && attr.name == Attribute::title) ||
                       (spec.source == ViewSource::body && attr.name == Attribute::body);
  if (!matches) {
    throw Error(ErrorCode::InvalidArgument, "view '" + spec.view_id + "' does not read attribute '" +
                                                std::string(to_string(attr.name)) + "'");
  }
  if (attr.name == Attribute::url) {
    return {spec.view_id, tokenize_for_spec(preprocess_url(attr.text), spec, stoplist, vocab)};
  }
  return {spec.view_id, tokenize_for_spec(attr.text, spec, stoplist, vocab)};
}

TokenSequence build_query_view(std::string_view query, const FieldViewSpec& spec,
                               const TextResources& resources) {
  const WordPieceVocab* vocab = resources.vocab ? &*resources.vocab : nullptr;
  return {spec.view_id, tokenize_for_spec(query, spec, resources.stoplist, vocab)};
}

}  // namespace tradrank
