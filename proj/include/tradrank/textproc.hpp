#pragma once

// Text processing: turns raw document attributes and query strings into
// named token-sequence views (tokenized, lemmatized, stopped, word pieces).

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tradrank {

using Tokens = std::vector<std::string>;

enum class Attribute { url, title, body };

/// Where a view takes its text from: one attribute, or all three
/// concatenated in url, title, body order.
enum class ViewSource { url, title, body, all };

enum class Scheme { word, wordpiece };

std::string_view to_string(Attribute attr);
std::string_view to_string(ViewSource source);
std::optional<ViewSource> parse_view_source(std::string_view text);

struct RawAttribute {
  Attribute name = Attribute::body;
  std::string text;
};

struct FieldViewSpec {
  ViewSource source = ViewSource::body;
  Scheme scheme = Scheme::word;
  bool lemmatize = false;
  bool stop = false;
  std::string view_id;

  bool operator==(const FieldViewSpec&) const = default;
};

struct TokenSequence {
  std::string view_id;
  Tokens tokens;

  bool operator==(const TokenSequence&) const = default;
};

/// Throws InvalidArgument if a spec violates its invariants (word pieces are
/// never lemmatized or stopped) or if two specs share a view_id.
void validate_view_specs(const std::vector<FieldViewSpec>& specs);

/// The views indexed by default: lemmatized+stopped and raw-tokenized
/// versions of each attribute, body word pieces, and the combined
/// "all.lemm" view used for candidate generation.
std::vector<FieldViewSpec> default_view_specs();

// ---- Unicode helpers ----------------------------------------------------

/// Decodes UTF-8 (invalid bytes become U+FFFD), NFC-normalizes, applies
/// simple case folding, and re-encodes as UTF-8.
std::string normalize_and_fold(std::string_view text);

// ---- Tokenizers ---------------------------------------------------------

/// Lowercased runs of letters and digits; everything else separates.
Tokens tokenize_word(std::string_view text);

/// Strips http://, https:// and www. prefixes and replaces URL punctuation
/// by single spaces. Case is preserved; tokenize_word lowercases afterwards.
std::string preprocess_url(std::string_view url);

/// Exception dictionary first, then suffix rules. Output length always
/// equals input length.
Tokens lemmatize(const Tokens& tokens);
std::string lemmatize_token(std::string_view token);

using Stoplist = std::unordered_set<std::string>;

Tokens remove_stopwords(const Tokens& tokens, const Stoplist& stoplist);
const Stoplist& default_stoplist();
Stoplist load_stoplist(const std::string& path);

class WordPieceVocab {
 public:
  static constexpr std::string_view kUnknown = "[UNK]";
  static constexpr std::size_t kMaxWordChars = 100;

  WordPieceVocab() = default;
  explicit WordPieceVocab(std::vector<std::string> pieces);

  static WordPieceVocab load(const std::string& path);

  bool contains(std::string_view piece) const;
  /// Line number in the vocabulary file, or nullopt.
  std::optional<std::size_t> id(std::string_view piece) const;
  std::size_t size() const { return pieces_.size(); }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Lowercase, split on whitespace, then greedy longest-prefix matching per
/// word. Words without a full decomposition, or longer than 100 code points,
/// become a single "[UNK]".
Tokens tokenize_wordpiece(std::string_view text, const WordPieceVocab& vocab);

// ---- View construction --------------------------------------------------

struct TextResources {
  Stoplist stoplist = default_stoplist();
  std::optional<WordPieceVocab> vocab;
};

/// Applies url cleanup (url attribute only), tokenization, then optional
/// lemmatization and stopping. Throws MissingVocabulary for word-piece
/// views without a vocabulary and InvalidArgument on a source mismatch.
TokenSequence build_view(const RawAttribute& attr, const FieldViewSpec& spec,
                         const Stoplist& stoplist, const WordPieceVocab* vocab);

/// Same processing as build_view, applied to query text (never url-cleaned).
TokenSequence build_query_view(std::string_view query, const FieldViewSpec& spec,
                               const TextResources& resources);

}  // namespace tradrank
