#include <gtest/gtest.h>

#include <random>

#include "synthetic.hpp"
#include "tradrank/error.hpp"
#include "tradrank/textproc.hpp"

using namespace tradrank;

TEST(TokenizeWord, EmptyInput) { EXPECT_TRUE(tokenize_word("").empty()); }

TEST(TokenizeWord, SplitsOnPunctuationAndLowercases) {
  EXPECT_EQ(tokenize_word("The Rain, in Spain."), (Tokens{"the", "rain", "in", "spain"}));
  EXPECT_EQ(tokenize_word("MS-MARCO v2.1"), (Tokens{"ms", "marco", "v2", "1"}));
}

TEST(TokenizeWord, UnicodeNormalizationAndFolding) {
  // Decomposed e + combining acute composes to the same token as the precomposed form.
  EXPECT_EQ(tokenize_word("E\xCC\x81" "COLE"), tokenize_word("\xC3\x89" "cole"));
  EXPECT_EQ(tokenize_word("\xC3\x89" "COLE"), (Tokens{"\xC3\xA9" "cole"}));
  EXPECT_EQ(tokenize_word("\xCE\xA3\xCE\x9F\xCE\xA6\xCE\x99\xCE\x91"), (Tokens{"\xCF\x83\xCE\xBF\xCF\x86\xCE\xB9\xCE\xB1"}));
}

TEST(TokenizeWord, InvalidBytesAreSeparators) {
  EXPECT_EQ(tokenize_word("ab\xFF" "cd \xC3"), (Tokens{"ab", "cd"}));
}

TEST(TokenizeWord, TokensAreNonEmptyWithoutWhitespace) {
  for (const auto& t : tokenize_word("  a\tb\n c -- d__e  ")) {
    EXPECT_FALSE(t.empty());
    EXPECT_EQ(t.find_first_of(" \t\n"), std::string::npos);
  }
}

TEST(PreprocessUrl, Examples) {
  EXPECT_EQ(preprocess_url(""), "");
  EXPECT_EQ(preprocess_url("http://example.com/a-b/c"), "example com a b c");
  EXPECT_EQ(preprocess_url("https://www.foo.org/page?id=3"), "foo org page id 3");
}

TEST(PreprocessUrl, PrefixMatchIsCaseInsensitive) {
  EXPECT_EQ(tokenize_word(preprocess_url("HTTPS://WWW.Foo.org/A_B#x%20y&z")),
            (Tokens{"foo", "org", "a", "b", "x", "20y", "z"}));
}

TEST(Lemmatize, Examples) {
  EXPECT_TRUE(lemmatize({}).empty());
  EXPECT_EQ(lemmatize({"running", "houses"}), (Tokens{"run", "house"}));
  EXPECT_EQ(lemmatize({"children"}), (Tokens{"child"}));
}

TEST(Lemmatize, SuffixRules) {
  EXPECT_EQ(lemmatize_token("studies"), "study");
  EXPECT_EQ(lemmatize_token("classes"), "class");
  EXPECT_EQ(lemmatize_token("boxes"), "box");
  EXPECT_EQ(lemmatize_token("cats"), "cat");
  EXPECT_EQ(lemmatize_token("making"), "make");
  EXPECT_EQ(lemmatize_token("stopped"), "stop");
  EXPECT_EQ(lemmatize_token("agreed"), "agree");
  EXPECT_EQ(lemmatize_token("bus"), "bus");
  EXPECT_EQ(lemmatize_token("v2"), "v2");
}

TEST(Lemmatize, PreservesLength) {
  synth::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens in;
    const int n = synth::uniform_int(rng, 0, 12);
    for (int i = 0; i < n; ++i) {
      std::string w;
      const int len = synth::uniform_int(rng, 1, 10);
      for (int c = 0; c < len; ++c) w += static_cast<char>('a' + synth::uniform_int(rng, 0, 25));
      in.push_back(w);
    }
    const auto out = lemmatize(in);
    ASSERT_EQ(out.size(), in.size());
    for (const auto& t : out) EXPECT_FALSE(t.empty());
  }
}

TEST(RemoveStopwords, Examples) {
  EXPECT_EQ(remove_stopwords({"the", "cat"}, {"the"}), (Tokens{"cat"}));
  EXPECT_TRUE(remove_stopwords({"the", "the"}, {"the"}).empty());
  EXPECT_EQ(remove_stopwords({"a", "cat", "on", "a", "mat"}, {"a", "on"}), (Tokens{"cat", "mat"}));
}

TEST(RemoveStopwords, Idempotent) {
  const Tokens x{"the", "cat", "is", "on", "the", "mat", "of", "doom"};
  const auto once = remove_stopwords(x, default_stoplist());
  EXPECT_EQ(remove_stopwords(once, default_stoplist()), once);
}

TEST(WordPiece, Examples) {
  const WordPieceVocab vocab({"un", "##aff", "##able", "[UNK]"});
  EXPECT_TRUE(tokenize_wordpiece("", vocab).empty());
  EXPECT_EQ(tokenize_wordpiece("unaffable", vocab), (Tokens{"un", "##aff", "##able"}));
  EXPECT_EQ(tokenize_wordpiece("qqq", WordPieceVocab({"un", "[UNK]"})), (Tokens{"[UNK]"}));
}

TEST(WordPiece, LongWordIsUnknown) {
  WordPieceVocab vocab({"[UNK]", "a", "##a"});
  EXPECT_EQ(tokenize_wordpiece(std::string(100, 'a'), vocab).size(), 100u);
  EXPECT_EQ(tokenize_wordpiece(std::string(101, 'a'), vocab), (Tokens{"[UNK]"}));
}

TEST(WordPiece, IdIsLineNumber) {
  WordPieceVocab vocab({"[UNK]", "a", "##b"});
  EXPECT_EQ(vocab.id("##b"), 2u);
  EXPECT_FALSE(vocab.id("zz").has_value());
}

TEST(WordPiece, PiecesReconstructTheWord) {
  std::vector<std::string> pieces{"[UNK]", "th", "the", "##ing", "##er", "re"};
  for (char c = 'a'; c <= 'z'; ++c) {
    pieces.emplace_back(1, c);
    pieces.push_back(std::string("##") + c);
  }
  const WordPieceVocab vocab(pieces);
  synth::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    std::string word;
    const int len = synth::uniform_int(rng, 1, 14);
    for (int c = 0; c < len; ++c) word += static_cast<char>('a' + synth::uniform_int(rng, 0, 25));
    std::string rebuilt;
    for (const auto& p : tokenize_wordpiece(word, vocab)) {
      ASSERT_NE(p, "[UNK]");
      rebuilt += p.rfind("##", 0) == 0 ? p.substr(2) : p;
    }
    EXPECT_EQ(rebuilt, word);
  }
}

TEST(BuildView, Examples) {
  const FieldViewSpec url{ViewSource::url, Scheme::word, false, false, "url.rawtok"};
  EXPECT_EQ(build_view({Attribute::url, "http://a.com/b"}, url, {}, nullptr).tokens,
            (Tokens{"a", "com", "b"}));
  const FieldViewSpec body{ViewSource::body, Scheme::word, true, true, "body.lemm"};
  EXPECT_TRUE(build_view({Attribute::body, ""}, body, default_stoplist(), nullptr).tokens.empty());
  const FieldViewSpec title{ViewSource::title, Scheme::word, true, true, "title.lemm"};
  const auto view = build_view({Attribute::title, "Running Shoes"}, title, {}, nullptr);
  EXPECT_EQ(view.tokens, (Tokens{"run", "shoe"}));
  EXPECT_EQ(view.view_id, "title.lemm");
}

TEST(BuildView, Errors) {
  const FieldViewSpec wp{ViewSource::body, Scheme::wordpiece, false, false, "body.wp"};
  try {
    build_view({Attribute::body, "x"}, wp, {}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingVocabulary);
  }
  const FieldViewSpec title{ViewSource::title, Scheme::word, false, false, "title"};
  EXPECT_THROW(build_view({Attribute::body, "x"}, title, {}, nullptr), Error);
}

TEST(BuildView, Deterministic) {
  const FieldViewSpec spec{ViewSource::body, Scheme::word, true, true, "b"};
  const RawAttribute attr{Attribute::body, "Stopped running, the dogs were walking home"};
  EXPECT_EQ(build_view(attr, spec, default_stoplist(), nullptr), build_view(attr, spec, default_stoplist(), nullptr));
}

TEST(ViewSpecs, Validation) {
  EXPECT_NO_THROW(validate_view_specs(default_view_specs()));
  EXPECT_THROW(validate_view_specs({{ViewSource::body, Scheme::wordpiece, true, false, "x"}}), Error);
  EXPECT_THROW(validate_view_specs({{ViewSource::body, Scheme::wordpiece, false, true, "x"}}), Error);
  EXPECT_THROW(validate_view_specs({{ViewSource::body, Scheme::word, false, false, "x"},
                                    {ViewSource::title, Scheme::word, false, false, "x"}}),
               Error);
}
