#pragma once

// LambdaMART: gradient-boosted regression trees fitted to NDCG-weighted
// pairwise lambda gradients.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "tradrank/features.hpp"
#include "tradrank/ranking.hpp"

namespace tradrank {

struct LabeledDoc {
  std::string doc_id;
  FeatureVector features{};
  int label = 0;
};

struct TrainingSet {
  std::map<std::string, std::vector<LabeledDoc>> groups;

  static TrainingSet from_rows(const std::vector<FeatureRow>& rows);
  std::size_t size() const;
};

/// Binary tree stored as a flat node array; node 0 is the root.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // 0-based slot; -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);  // throws InvalidArgument if malformed

  static RegressionTree leaf(double value) { return RegressionTree({Node{-1, 0.0, -1, -1, value}}); }

  /// Goes left iff x[feature] <= threshold.
  double evaluate(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t num_leaves() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

struct TreeParams {
  std::size_t num_leaves = 10;
  std::size_t min_leaf_instances = 20;
};

/// Best-first growth on squared error. Candidate thresholds are midpoints
/// between consecutive distinct feature values; a split must leave at least
/// min_leaf_instances samples on each side. Leaf values are
/// sum(targets) / sum(weights) over the leaf, 0 when the weight sum is 0.
RegressionTree fit_regression_tree(const std::vector<FeatureVector>& x,
                                   const std::vector<double>& targets,
                                   const std::vector<double>& weights, const TreeParams& params);

class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(double learning_rate, std::vector<RegressionTree> trees,
                std::size_t feature_count = kFeatureCount);

  /// sum over trees of learning_rate * tree(x). Throws DimensionMismatch.
  double predict(std::span<const double> x) const;
  double learning_rate() const { return learning_rate_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  bool operator==(const EnsembleModel&) const = default;

 private:
  double learning_rate_ = 0.1;
  std::size_t feature_count_ = kFeatureCount;
  std::vector<RegressionTree> trees_;
};

struct LambdaMartParams {
  std::size_t num_trees = 300;
  std::size_t num_leaves = 10;
  double learning_rate = 0.1;
  std::size_t min_leaf_instances = 20;
  int ndcg_truncation = 10;
  double sigma = 1.0;
};

struct GroupGradients {
  std::vector<double> lambdas;  // cost gradient per document
  std::vector<double> weights;  // second-order weight per document
};

/// Pairwise lambda of a label-discordant pair (i more relevant than j):
/// -sigma / (1 + exp(sigma (s_i - s_j))) * |delta NDCG|.
double pair_lambda(double score_i, double score_j, double delta_ndcg, double sigma);

/// Matrix of pairwise lambdas for one group (row i, column j: gradient on
/// document i from its pair with j; zero for equal labels). Documents are
/// ranked by current score, ties by doc_id.
std::vector<std::vector<double>> pairwise_lambdas(const std::vector<int>& labels,
                                                  const std::vector<double>& scores,
                                                  const std::vector<std::string>& doc_ids,
                                                  int truncation, double sigma);

/// Aggregated per-document lambdas and weights; all zero when the group's
/// ideal DCG is 0.
GroupGradients group_gradients(const std::vector<int>& labels, const std::vector<double>& scores,
                               const std::vector<std::string>& doc_ids, int truncation,
                               double sigma);

struct TrainingTrace {
  std::vector<double> ndcg;  // mean training NDCG@truncation before round 1 and after each round
};

/// Throws DegenerateTraining if no group has two distinct labels and
/// InvalidArgument for bad parameters. Groups are processed in qid order and
/// documents in doc_id order, so input order does not affect the model.
EnsembleModel train_lambdamart(const TrainingSet& train, const LambdaMartParams& params,
                               TrainingTrace* trace = nullptr);

/// Rescores candidates with the model and sorts by ranks_before. Throws
/// MissingFeatures if a candidate has no feature vector.
CandidateList rerank(const CandidateList& candidates,
                     const std::map<std::string, FeatureVector>& features,
                     const EnsembleModel& model);

void write_model(const std::string& path, const EnsembleModel& model);
EnsembleModel read_model(const std::string& path);

}  // namespace tradrank
