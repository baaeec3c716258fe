#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"

using namespace tradrank;
namespace fs = std::filesystem;

namespace {

RunFile run_of(const std::map<std::string, std::vector<std::string>>& ranked) {
  RunFile run;
  for (const auto& [qid, docs] : ranked) {
    std::vector<ScoredDoc> scored;
    for (std::size_t i = 0; i < docs.size(); ++i) scored.push_back({docs[i], static_cast<double>(docs.size() - i)});
    run.set_ranking(qid, scored);
  }
  return run;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Mrr, Examples) {
  Qrels qrels;
  qrels.set("q1", "r", 1);
  EXPECT_EQ(mrr_at_k(run_of({{"q1", {"r", "x"}}}), qrels, 10), 1.0);
  EXPECT_EQ(mrr_at_k(run_of({{"q1", {"a", "b", "c", "r"}}}), qrels, 10), 0.25);
  EXPECT_EQ(mrr_at_k(run_of({{"q1", {"a", "b", "c", "r"}}}), qrels, 3), 0.0);
  qrels.set("q2", "s", 2);
  const double two = mrr_at_k(run_of({{"q1", {"r"}}, {"q2", {"a", "b", "s"}}}), qrels, 10);
  EXPECT_NEAR(two, 0.66667, 1e-5);
  EXPECT_DOUBLE_EQ(two, (1.0 + 1.0 / 3.0) / 2.0);
}

TEST(Mrr, EvaluatedQuerySet) {
  Qrels qrels;
  qrels.set("q1", "r", 1);
  qrels.set("q2", "x", 0);  // no relevant document: excluded
  qrels.set("q3", "s", 1);  // absent from the run: scores 0
  const auto run = run_of({{"q1", {"r"}}, {"q2", {"x"}}, {"q9", {"z"}}});
  EXPECT_EQ(mrr_at_k(run, qrels, 10), 0.5);
  EXPECT_EQ(code_of([&] { mrr_at_k(run, Qrels{}, 10); }), ErrorCode::NoEvaluableQueries);
  EXPECT_EQ(code_of([&] { ndcg_at_k(run, Qrels{}, 10); }), ErrorCode::NoEvaluableQueries);
}

TEST(Ndcg, Examples) {
  Qrels qrels;
  qrels.set("q1", "a", 1);
  qrels.set("q1", "b", 1);
  EXPECT_EQ(ndcg_at_k(run_of({{"q1", {"a", "b", "c"}}}), qrels, 10), 1.0);

  Qrels single;
  single.set("q1", "r", 1);
  const double v = ndcg_at_k(run_of({{"q1", {"x", "r"}}}), single, 10);
  EXPECT_NEAR(v, 0.63093, 1e-5);
  EXPECT_DOUBLE_EQ(v, 1.0 / std::log2(3.0));
  EXPECT_EQ(ndcg_at_k(run_of({{"q1", {"x", "r"}}}), single, 1), 0.0);
}

TEST(Ndcg, GradedGainsAndHelpers) {
  EXPECT_DOUBLE_EQ(dcg_at_k({2, 0, 1}, 10), 3.0 + 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(ideal_dcg_at_k({0, 1, 2}, 10), 3.0 + 1.0 / std::log2(3.0));
  EXPECT_DOUBLE_EQ(ideal_dcg_at_k({0, 1, 2}, 1), 3.0);
  Qrels qrels;
  qrels.set("q", "hi", 2);
  qrels.set("q", "lo", 1);
  const auto per = per_query_ndcg(run_of({{"q", {"lo", "hi"}}}), qrels, 10);
  ASSERT_EQ(per.size(), 1u);
  EXPECT_DOUBLE_EQ(per.at("q"), (1.0 + 3.0 / std::log2(3.0)) / (3.0 + 1.0 / std::log2(3.0)));
}

TEST(Metrics, AgreeWithBruteForceAndStayInRange) {
  synth::Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    Qrels qrels;
    RunFile run;
    const int queries = synth::uniform_int(rng, 1, 20);
    for (int q = 0; q < queries; ++q) {
      const std::string qid = "q" + std::to_string(q);
      const int docs = synth::uniform_int(rng, 1, 50);
      std::vector<ScoredDoc> ranked;
      for (int d = 0; d < docs; ++d) {
        const std::string id = "d" + std::to_string(d);
        if (synth::uniform_int(rng, 0, 2) == 0) qrels.set(qid, id, synth::uniform_int(rng, 0, 3));
        if (synth::uniform_int(rng, 0, 4) > 0) ranked.push_back({id, static_cast<double>(synth::uniform_int(rng, 0, 20))});
      }
      if (!ranked.empty()) run.set_ranking(qid, ranked);
    }
    bool evaluable = false;
    for (const auto& [qid, docs] : qrels.judgments) evaluable = evaluable || qrels.has_relevant(qid);
    if (!evaluable) continue;
    double previous = 0.0;
    for (int k : {1, 3, 5, 10, 20, 100}) {
      const double m = mrr_at_k(run, qrels, k);
      const double n = ndcg_at_k(run, qrels, k);
      EXPECT_NEAR(m, oracle::mrr(run, qrels, k), 1e-12);
      EXPECT_NEAR(n, oracle::ndcg(run, qrels, k), 1e-12);
      EXPECT_GE(m, previous);
      previous = m;
      EXPECT_GE(n, 0.0);
      EXPECT_LE(n, 1.0 + 1e-12);
      EXPECT_LE(m, 1.0);
    }
  }
}

TEST(RunFile, SetRankingOrdersAndRejectsDuplicates) {
  RunFile run;
  run.set_ranking("q", {{"b", 1.0}, {"c", 2.0}, {"a", 1.0}});
  const auto& e = run.queries.at("q");
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (RunEntry{"c", 1, 2.0}));
  EXPECT_EQ(e[1], (RunEntry{"a", 2, 1.0}));
  EXPECT_EQ(e[2], (RunEntry{"b", 3, 1.0}));
  EXPECT_EQ(code_of([&] { run.set_ranking("q", {{"a", 1.0}, {"a", 2.0}}); }), ErrorCode::InconsistentRanks);
}

TEST(TrecIo, EmptyAndFixtureFiles) {
  synth::TempDir dir;
  std::ofstream(dir.path() / "empty.txt").close();
  EXPECT_EQ(read_qrels((dir.path() / "empty.txt").string()).size(), 0u);
  EXPECT_TRUE(read_run((dir.path() / "empty.txt").string()).queries.empty());

  std::ofstream(dir.path() / "three.txt") << "q1 0 d1 1\nq1 0 d2 0\nq2 0 d9 2\n";
  const auto qrels = read_qrels((dir.path() / "three.txt").string());
  EXPECT_EQ(qrels.size(), 3u);
  EXPECT_EQ(qrels.relevance("q2", "d9"), 2);
  EXPECT_EQ(qrels.relevance("q2", "nope"), 0);

  std::ofstream(dir.path() / "dup.txt") << "q1 0 d1 1\nq1 0 d1 0\n";
  const auto dup = read_qrels((dir.path() / "dup.txt").string());
  EXPECT_EQ(dup.size(), 1u);
  EXPECT_EQ(dup.duplicates, 1u);
  EXPECT_EQ(dup.relevance("q1", "d1"), 0);
}

TEST(TrecIo, RoundTrip) {
  synth::TempDir dir;
  const auto run = run_of({{"q1", {"a", "b", "c"}}, {"q2", {"z", "y"}}});
  write_run((dir.path() / "a.run").string(), run);
  const auto back = read_run((dir.path() / "a.run").string());
  EXPECT_EQ(back, run);
  write_run((dir.path() / "b.run").string(), back);
  EXPECT_EQ(slurp(dir.path() / "a.run"), slurp(dir.path() / "b.run"));

  Qrels qrels;
  qrels.set("q2", "z", 3);
  qrels.set("q1", "a", 0);
  write_qrels((dir.path() / "a.qrels").string(), qrels);
  EXPECT_EQ(read_qrels((dir.path() / "a.qrels").string()), qrels);
}

TEST(TrecIo, Errors) {
  synth::TempDir dir;
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir.path() / name) << text;
    return (dir.path() / name).string();
  };
  const auto bad_qrels = write("bad.qrels", "q1 0 d1 1\nq1 0 d2\n");
  try {
    read_qrels(bad_qrels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([&] { read_qrels(write("rel.qrels", "q1 0 d1 x\n")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { read_run(write("short.run", "q1 Q0 d1 1 0.5\n")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { read_run(write("gap.run", "q1 Q0 d1 1 2 t\nq1 Q0 d2 3 1 t\n")); }),
            ErrorCode::InconsistentRanks);
  EXPECT_EQ(code_of([&] { read_run(write("up.run", "q1 Q0 d1 1 1 t\nq1 Q0 d2 2 5 t\n")); }),
            ErrorCode::InconsistentRanks);
  EXPECT_EQ(code_of([&] { read_run(write("dup.run", "q1 Q0 d1 1 2 t\nq1 Q0 d1 2 1 t\n")); }),
            ErrorCode::InconsistentRanks);
  EXPECT_NO_THROW(read_run(write("ok.run", "q1 Q0 d2 2 1 t\nq1 Q0 d1 1 2 t\n")));
}
