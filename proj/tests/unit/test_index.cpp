#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/index.hpp"

using namespace tradrank;
namespace fs = std::filesystem;

namespace {

const FieldViewSpec kBody{ViewSource::body, Scheme::word, true, true, "body.lemm"};

ViewIndex index_of(const std::vector<Tokens>& docs, std::vector<std::string> ids = {}) {
  auto table = std::make_shared<DocTable>();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    table->add(ids.empty() ? "d" + std::to_string(i + 1) : ids[i]);
  }
  return build_view_index(kBody, table, docs);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<DocumentRecord> two_cats() {
  return {{"d1", "", "", "cat"}, {"d2", "", "", "cat cat"}};
}

}  // namespace

TEST(BuildIndices, TwoDocumentExample) {
  const auto set = build_indices(two_cats(), {kBody}, {});
  const auto& inv = set.view("body.lemm").inverted;
  EXPECT_EQ(inv.df("cat"), 2u);
  const TermId cat = *inv.dictionary().find("cat");
  EXPECT_EQ(inv.tf(cat, 0), 1u);
  EXPECT_EQ(inv.tf(cat, 1), 2u);
  EXPECT_EQ(inv.num_docs(), 2u);
  EXPECT_DOUBLE_EQ(inv.avg_len(), 1.5);
}

TEST(BuildIndices, EmptyDocument) {
  const auto set = build_indices({{"d1", "", "", ""}}, {kBody}, {});
  const auto& inv = set.view("body.lemm").inverted;
  EXPECT_EQ(inv.num_docs(), 1u);
  EXPECT_EQ(inv.doc_len(0), 0u);
  EXPECT_EQ(inv.dictionary().size(), 0u);
}

TEST(BuildIndices, Errors) {
  try {
    build_indices({{"d1", "", "", "a"}, {"d1", "", "", "b"}}, {kBody}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateDocId);
  }
  try {
    build_indices({}, {kBody}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorpus);
  }
}

TEST(BuildIndices, AllViewConcatenatesAttributes) {
  const FieldViewSpec all{ViewSource::all, Scheme::word, false, false, "all"};
  const auto set = build_indices({{"d1", "http://x.org/a", "Big Title", "body text"}}, {all}, {});
  EXPECT_EQ(set.view("all").forward.doc_tokens(0), (Tokens{"x", "org", "a", "big", "title", "body", "text"}));
}

TEST(BuildIndices, ForwardMatchesInverted) {
  synth::Rng rng(11);
  const auto docs = synth::random_corpus(rng, 200, 40, 30);
  const auto vi = index_of(docs);
  const auto& inv = vi.inverted;
  std::uint64_t total = 0;
  for (DocOrdinal d = 0; d < docs.size(); ++d) {
    std::map<TermId, std::uint32_t> counts;
    for (TermId t : vi.forward.doc(d)) ++counts[t];
    for (TermId t = 0; t < inv.dictionary().size(); ++t) {
      ASSERT_EQ(inv.tf(t, d), counts.contains(t) ? counts[t] : 0u);
    }
    EXPECT_EQ(vi.forward.doc_tokens(d), docs[d]);
    EXPECT_EQ(inv.doc_len(d), docs[d].size());
    total += inv.doc_len(d);
  }
  EXPECT_DOUBLE_EQ(inv.avg_len(), static_cast<double>(total) / docs.size());
  for (TermId t = 0; t < inv.dictionary().size(); ++t) {
    const auto postings = inv.postings(t);
    for (std::size_t i = 0; i < postings.size(); ++i) {
      EXPECT_GE(postings[i].tf, 1u);
      if (i > 0) EXPECT_LT(postings[i - 1].doc, postings[i].doc);
    }
  }
}

TEST(Idf, Examples) {
  EXPECT_DOUBLE_EQ(idf_from_counts(2, 2), std::log(1.2));
  EXPECT_NEAR(idf_from_counts(2, 2), 0.18232, 1e-5);
  EXPECT_DOUBLE_EQ(idf_from_counts(1, 0), std::log(4.0));
  EXPECT_NEAR(idf_from_counts(1, 0), 1.38629, 1e-5);
  for (std::size_t df = 1; df <= 100; ++df) EXPECT_LT(idf_from_counts(100, df), idf_from_counts(100, df - 1));
  const auto set = build_indices(two_cats(), {kBody}, {});
  EXPECT_DOUBLE_EQ(idf(set.view("body.lemm").inverted, "cat"), std::log(1.2));
  EXPECT_DOUBLE_EQ(idf(set.view("body.lemm").inverted, "dog"), idf_from_counts(2, 0));
}

TEST(Bm25, WorkedExample) {
  const auto set = build_indices(two_cats(), {kBody}, {});
  const auto& inv = set.view("body.lemm").inverted;
  const double score = bm25_score(inv, {1.2, 0.75}, {"cat"}, 1);
  EXPECT_NEAR(score, 0.22921, 1e-5);
  EXPECT_DOUBLE_EQ(score, std::log(1.2) * 4.4 / 3.5);
  EXPECT_EQ(bm25_score(inv, {1.2, 0.75}, {"dog"}, 1), 0.0);
}

TEST(Bm25, NoLengthNormalizationWhenBIsZero) {
  const auto vi = index_of({{"a", "x"}, {"a", "x", "y", "z", "w", "v"}, {"q"}});
  const BM25Params p{1.2, 0.0};
  EXPECT_DOUBLE_EQ(bm25_score(vi.inverted, p, {"a"}, 0), bm25_score(vi.inverted, p, {"a"}, 1));
}

TEST(Bm25, MonotoneInTermFrequencyWithoutLengthNormalization) {
  const BM25Params p{1.2, 0.0};
  Tokens doc{"b"};
  double previous = 0.0;
  for (int tf = 1; tf <= 10; ++tf) {
    doc.push_back("a");
    const auto vi = index_of({doc, {"c"}});
    const double s = bm25_score(vi.inverted, p, {"a"}, 0);
    EXPECT_GE(s, previous);
    previous = s;
  }
}

TEST(Bm25, RejectsBadParams) {
  EXPECT_THROW(validate(BM25Params{-0.1, 0.5}), Error);
  EXPECT_THROW(validate(BM25Params{1.0, 1.5}), Error);
  EXPECT_NO_THROW(validate(BM25Params{0.0, 1.0}));
}

TEST(RetrieveTopk, Examples) {
  const auto set = build_indices(two_cats(), {kBody}, {});
  const auto& inv = set.view("body.lemm").inverted;
  EXPECT_TRUE(retrieve_topk(inv, {}, {"dog"}, 10).entries.empty());
  const auto top = retrieve_topk(inv, {}, {"cat"}, 1);
  ASSERT_EQ(top.entries.size(), 1u);
  EXPECT_EQ(top.entries[0].doc_id, "d2");
}

TEST(RetrieveTopk, MatchesExhaustiveScoringOnThousandDocs) {
  synth::Rng rng(12);
  const auto docs = synth::random_corpus(rng, 1000, 120, 40);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < docs.size(); ++i) ids.push_back("doc" + std::to_string((i * 7919) % 1000));
  const auto vi = index_of(docs, ids);
  for (int q = 0; q < 30; ++q) {
    const auto query = synth::random_query(rng, 130, 5);
    const auto want = oracle::bm25_exhaustive(docs, ids, query, 1.2, 0.75);
    for (std::size_t k : {std::size_t{1}, std::size_t{10}, want.size() + 1}) {
      const auto got = retrieve_topk(vi.inverted, {1.2, 0.75}, query, k);
      ASSERT_EQ(got.entries.size(), std::min(k, want.size()));
      for (std::size_t i = 0; i < got.entries.size(); ++i) {
        EXPECT_EQ(got.entries[i].doc_id, want[i].doc_id);
        EXPECT_NEAR(got.entries[i].score, want[i].score, 1e-9);
        EXPECT_EQ(got.entries[i].score, bm25_score(vi.inverted, {1.2, 0.75}, query, *vi.inverted.docs().find(got.entries[i].doc_id)));
      }
    }
  }
}

TEST(RetrieveTopk, TiesBreakByDocId) {
  const auto vi = index_of({{"a", "b"}, {"a", "b"}, {"a", "b"}}, {"z", "m", "c"});
  const auto got = retrieve_topk(vi.inverted, {}, {"a"}, 2);
  ASSERT_EQ(got.entries.size(), 2u);
  EXPECT_EQ(got.entries[0].doc_id, "c");
  EXPECT_EQ(got.entries[1].doc_id, "m");
}

TEST(IndexIo, RoundTripAndDeterminism) {
  synth::TempDir dir;
  std::vector<DocumentRecord> corpus;
  synth::Rng rng(13);
  const auto bodies = synth::random_corpus(rng, 50, 30, 20);
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    std::string body;
    for (const auto& t : bodies[i]) body += t + " ";
    corpus.push_back({"d" + std::to_string(i), "http://x.org/" + std::to_string(i), "Title " + std::to_string(i % 3), body});
  }
  TextResources resources;
  resources.vocab = WordPieceVocab({"[UNK]", "t", "##1", "##2", "##3", "##4", "##5", "##6", "##7", "##8", "##9", "##0"});
  const auto built = build_indices(corpus, default_view_specs(), resources);
  save_indices(built, (dir.path() / "a").string());
  save_indices(build_indices(corpus, default_view_specs(), resources), (dir.path() / "b").string());
  const auto loaded = load_indices((dir.path() / "a").string());
  EXPECT_EQ(*loaded.docs, *built.docs);
  for (const auto& [id, vi] : built.views) {
    EXPECT_EQ(loaded.view(id).spec, vi.spec);
    EXPECT_TRUE(loaded.view(id).inverted == vi.inverted) << id;
    EXPECT_TRUE(loaded.view(id).forward == vi.forward) << id;
  }
  for (const auto& e : fs::recursive_directory_iterator(dir.path() / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir.path() / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir.path() / "b" / rel)) << rel;
  }
  try {
    loaded.view("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingArtifact);
  }
}

TEST(Corpus, ReadsTsvAndJsonLinesSkippingMalformed) {
  synth::TempDir dir;
  {
    std::ofstream tsv(dir.path() / "c.tsv");
    tsv << "d1\thttp://a\tT\tbody one\n"
        << "broken line\n"
        << "d2\thttp://b\tT2\tbody two\n";
    std::ofstream jsonl(dir.path() / "c.jsonl");
    jsonl << R"({"id": "x1", "url": "u", "title": "t", "body": "b"})" << '\n'
          << "{not json\n"
          << R"({"id": 7, "url": "", "title": "", "body": "seven"})" << '\n';
  }
  ReadStats stats;
  const auto tsv = read_corpus((dir.path() / "c.tsv").string(), &stats);
  ASSERT_EQ(tsv.size(), 2u);
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(tsv[1].body, "body two");
  const auto jsonl = read_corpus((dir.path() / "c.jsonl").string(), &stats);
  ASSERT_EQ(jsonl.size(), 2u);
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(jsonl[1].doc_id, "7");
}

TEST(Metric, Parse) {
  EXPECT_EQ(parse_metric("ndcg@10").kind, MetricKind::ndcg);
  EXPECT_EQ(parse_metric("mrr@100").cutoff, 100);
  EXPECT_THROW(parse_metric("map@10"), Error);
  EXPECT_THROW(parse_metric("mrr"), Error);
  EXPECT_THROW(parse_metric("mrr@0"), Error);
}

TEST(TuneBm25, DefaultGrid) {
  const auto grid = default_bm25_grid();
  ASSERT_EQ(grid.size(), 45u);
  EXPECT_EQ(grid.front(), (BM25Params{0.4, 0.3}));
  EXPECT_EQ(grid[5], (BM25Params{0.6, 0.3}));
  EXPECT_EQ(grid.back(), (BM25Params{2.0, 0.9}));
}

namespace {

// Each query term has one short relevant document and long spam documents
// repeating the term; with uniform_lengths every document is padded to the
// same length so b has no effect.
struct TuningCorpus {
  ViewIndex index;
  std::map<std::string, Tokens> queries;
  Qrels qrels;
};

TuningCorpus tuning_corpus(bool uniform_lengths) {
  std::vector<Tokens> docs;
  std::vector<std::string> ids;
  TuningCorpus out;
  int filler = 0;
  auto pad = [&](Tokens d, std::size_t len) {
    while (d.size() < len) d.push_back("f" + std::to_string(filler++ % 300));
    return d;
  };
  for (int q = 0; q < 10; ++q) {
    const std::string term = "w" + std::to_string(q);
    const std::string qid = "q" + std::to_string(q);
    docs.push_back(pad({term}, uniform_lengths ? 40 : 3));
    ids.push_back("z_rel" + std::to_string(q));
    out.qrels.set(qid, ids.back(), 1);
    for (int s = 0; s < 2; ++s) {
      docs.push_back(pad(uniform_lengths ? Tokens{term} : Tokens{term, term}, 40));
      ids.push_back("a_spam" + std::to_string(q) + "_" + std::to_string(s));
    }
    out.queries[qid] = {term};
  }
  out.index = index_of(docs, ids);
  return out;
}

}  // namespace

TEST(TuneBm25, SpamCorpusPrefersStrongerLengthNormalization) {
  const auto spam = tuning_corpus(false);
  const auto neutral = tuning_corpus(true);
  const auto grid = default_bm25_grid();
  const auto spam_best = tune_bm25(spam.index.inverted, spam.queries, spam.qrels, grid);
  const auto neutral_best = tune_bm25(neutral.index.inverted, neutral.queries, neutral.qrels, grid);
  EXPECT_GT(spam_best.best.b, neutral_best.best.b);
  EXPECT_EQ(spam_best.values.size(), grid.size());
}

TEST(TuneBm25, TiesAndErrors) {
  const auto c = tuning_corpus(true);
  const std::vector<BM25Params> one{{0.9, 0.4}};
  EXPECT_EQ(tune_bm25(c.index.inverted, c.queries, c.qrels, one).best, one[0]);
  const std::vector<BM25Params> two{{1.0, 0.5}, {1.5, 0.5}};
  const auto r = tune_bm25(c.index.inverted, c.queries, c.qrels, two);
  ASSERT_EQ(r.values[0], r.values[1]);
  EXPECT_EQ(r.best, two[0]);
  try {
    tune_bm25(c.index.inverted, c.queries, c.qrels, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  try {
    tune_bm25(c.index.inverted, c.queries, Qrels{}, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoJudgedQueries);
  }
}
