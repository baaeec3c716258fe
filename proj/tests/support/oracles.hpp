#pragma once

// Reference implementations written directly from the formulas, sharing no
// code with the library beyond plain data types.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tradrank/eval.hpp"
#include "tradrank/model1.hpp"
#include "tradrank/ranking.hpp"

namespace oracle {

using tradrank::Tokens;

/// Scores every document exhaustively and returns those with a positive
/// score, best first (ties by doc_id).
std::vector<tradrank::ScoredDoc> bm25_exhaustive(const std::vector<Tokens>& docs,
                                                 const std::vector<std::string>& doc_ids,
                                                 const Tokens& query, double k1, double b);

using DenseTable = std::map<std::pair<std::string, std::string>, double>;  // (source, target) -> t

struct DenseEm {
  DenseTable table;
  std::vector<double> log_likelihood;  // initial table, then after each iteration
};

/// Model 1 EM over full |Vs| x |Vt| matrices with uniform 1/|Vt| start.
DenseEm model1_em(const std::vector<tradrank::BitextPair>& bitext, int iterations);

/// Direct evaluation of the smoothed Model 1 query likelihood from a
/// (source, target) map, summing over distinct document terms.
double model1_score(const Tokens& query, const Tokens& doc, const DenseTable& table, double lambda,
                    double self_prob, const std::map<std::string, double>& collection);

double mrr(const tradrank::RunFile& run, const tradrank::Qrels& qrels, int k);
double ndcg(const tradrank::RunFile& run, const tradrank::Qrels& qrels, int k);

}  // namespace oracle
