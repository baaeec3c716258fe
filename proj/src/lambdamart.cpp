#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/ltr.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

TrainingSet TrainingSet::from_rows(const std::vector<FeatureRow>& rows) {
  TrainingSet set;
  for (const auto& row : rows) {
    set.groups[row.qid].push_back({row.doc_id, row.values, row.label});
  }
  return set;
}

std::size_t TrainingSet::size() const {
  std::size_t n = 0;
  for (const auto& [qid, docs] : groups) n += docs.size();
  return n;
}

EnsembleModel::EnsembleModel(double learning_rate, std::vector<RegressionTree> trees,
                             std::size_t feature_count)
    : learning_rate_(learning_rate), feature_count_(feature_count), trees_(std::move(trees)) {
  if (!(learning_rate_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  }
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= feature_count_) {
        throw Error(ErrorCode::DimensionMismatch, "tree splits on a feature past feature_count");
      }
    }
  }
}

double EnsembleModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count_) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(feature_count_) +
                                                  " features, got " + std::to_string(x.size()));
  }
  double score = 0.0;
  for (const auto& tree : trees_) {
    score += learning_rate_ * tree.evaluate(x);
  }
  return score;
}

double pair_lambda(double score_i, double score_j, double delta_ndcg, double sigma) {
  return -sigma / (1.0 + std::exp(sigma * (score_i - score_j))) * std::abs(delta_ndcg);
}

namespace {

struct RankedGroup {
  std::vector<std::size_t> rank_of;  // document -> 1-based rank
  std::vector<std::size_t> by_rank;  // rank - 1 -> document
  double inverse_ideal = 0.0;        // 0 when the ideal DCG is 0
};

RankedGroup rank_group(const std::vector<int>& labels, const std::vector<double>& scores,
                       const std::vector<std::string>& doc_ids, int truncation) {
  const std::size_t n = labels.size();
  RankedGroup g;
  g.by_rank.resize(n);
  std::iota(g.by_rank.begin(), g.by_rank.end(), 0);
  std::sort(g.by_rank.begin(), g.by_rank.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (doc_ids[a] != doc_ids[b]) return doc_ids[a] < doc_ids[b];
    return a < b;
  });
  g.rank_of.resize(n);
  for (std::size_t r = 0; r < n; ++r) g.rank_of[g.by_rank[r]] = r + 1;
  const double ideal = ideal_dcg_at_k(labels, truncation);
  g.inverse_ideal = ideal > 0.0 ? 1.0 / ideal : 0.0;
  return g;
}

double discount(std::size_t rank, int truncation) {
  return rank <= static_cast<std::size_t>(truncation) ? 1.0 / std::log2(static_cast<double>(rank) + 1.0)
                                                      : 0.0;
}

double delta_ndcg(int label_a, int label_b, std::size_t rank_a, std::size_t rank_b, int truncation,
                  double inverse_ideal) {
  const double gain_gap = std::exp2(label_a) - std::exp2(label_b);
  const double discount_gap = discount(rank_a, truncation) - discount(rank_b, truncation);
  return std::abs(gain_gap * discount_gap) * inverse_ideal;
}

void check_group(const std::vector<int>& labels, const std::vector<double>& scores,
                 const std::vector<std::string>& doc_ids, int truncation, double sigma) {
  if (labels.size() != scores.size() || labels.size() != doc_ids.size()) {
    throw Error(ErrorCode::DimensionMismatch, "group vectors differ in length");
  }
  if (truncation < 1 || !(sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "truncation must be >= 1 and sigma > 0");
  }
}

}  // namespace

std::vector<std::vector<double>> pairwise_lambdas(const std::vector<int>& labels,
                                                  const std::vector<double>& scores,
                                                  const std::vector<std::string>& doc_ids,
                                                  int truncation, double sigma) {
  check_group(labels, scores, doc_ids, truncation, sigma);
  const std::size_t n = labels.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  const auto g = rank_group(labels, scores, doc_ids, truncation);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] == labels[j]) continue;
      const std::size_t hi = labels[i] > labels[j] ? i : j;
      const std::size_t lo = hi == i ? j : i;
      const double delta =
          delta_ndcg(labels[hi], labels[lo], g.rank_of[hi], g.rank_of[lo], truncation, g.inverse_ideal);
      const double lambda = pair_lambda(scores[hi], scores[lo], delta, sigma);
      out[i][j] = i == hi ? lambda : -lambda;
    }
  }
  return out;
}

GroupGradients group_gradients(const std::vector<int>& labels, const std::vector<double>& scores,
                               const std::vector<std::string>& doc_ids, int truncation,
                               double sigma) {
  check_group(labels, scores, doc_ids, truncation, sigma);
  const std::size_t n = labels.size();
  GroupGradients out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto g = rank_group(labels, scores, doc_ids, truncation);
  if (g.inverse_ideal == 0.0) {
    return out;
  }
  // Pairs with both documents below the truncation have zero delta.
  const std::size_t top = std::min(n, static_cast<std::size_t>(truncation));
  for (std::size_t a = 0; a < top; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::size_t i = g.by_rank[a];
      const std::size_t j = g.by_rank[b];
      if (labels[i] == labels[j]) continue;
      const std::size_t hi = labels[i] > labels[j] ? i : j;
      const std::size_t lo = hi == i ? j : i;
      const double delta =
          delta_ndcg(labels[hi], labels[lo], g.rank_of[hi], g.rank_of[lo], truncation, g.inverse_ideal);
      const double lambda = pair_lambda(scores[hi], scores[lo], delta, sigma);
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[hi] - scores[lo])));
      const double weight = sigma * sigma * rho * (1.0 - rho) * delta;
      out.lambdas[hi] += lambda;
      out.lambdas[lo] -= lambda;
      out.weights[hi] += weight;
      out.weights[lo] += weight;
    }
  }
  return out;
}

namespace {

struct FlatData {
  std::vector<FeatureVector> x;
  std::vector<int> labels;
  std::vector<std::string> doc_ids;
  std::vector<std::size_t> offsets{0};  // group boundaries
};

FlatData flatten(const TrainingSet& train) {
  FlatData flat;
  for (const auto& [qid, docs] : train.groups) {
    std::vector<const LabeledDoc*> sorted;
    for (const auto& d : docs) sorted.push_back(&d);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const LabeledDoc* a, const LabeledDoc* b) { return a->doc_id < b->doc_id; });
    for (const auto* d : sorted) {
      flat.x.push_back(d->features);
      flat.labels.push_back(d->label);
      flat.doc_ids.push_back(d->doc_id);
    }
    flat.offsets.push_back(flat.x.size());
  }
  return flat;
}

double mean_group_ndcg(const FlatData& flat, const std::vector<double>& scores, int truncation) {
  double sum = 0.0;
  std::size_t groups = 0;
  for (std::size_t g = 0; g + 1 < flat.offsets.size(); ++g) {
    const auto begin = flat.offsets[g];
    const auto end = flat.offsets[g + 1];
    std::vector<int> labels(flat.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                            flat.labels.begin() + static_cast<std::ptrdiff_t>(end));
    const double ideal = ideal_dcg_at_k(labels, truncation);
    if (ideal <= 0.0) continue;
    std::vector<std::size_t> order(end - begin);
    std::iota(order.begin(), order.end(), begin);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return flat.doc_ids[a] < flat.doc_ids[b];
    });
    std::vector<int> ranked;
    for (auto i : order) ranked.push_back(flat.labels[i]);
    sum += dcg_at_k(ranked, truncation) / ideal;
    ++groups;
  }
  return groups == 0 ? 0.0 : sum / static_cast<double>(groups);
}

}  // namespace

EnsembleModel train_lambdamart(const TrainingSet& train, const LambdaMartParams& params,
                               TrainingTrace* trace) {
  if (!(params.learning_rate > 0.0) || params.num_leaves < 1 || params.min_leaf_instances < 1 ||
      params.ndcg_truncation < 1 || !(params.sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid LambdaMART parameters");
  }
  bool has_variation = false;
  for (const auto& [qid, docs] : train.groups) {
    for (const auto& d : docs) {
      if (d.label != docs.front().label) {
        has_variation = true;
        break;
      }
    }
  }
  if (!has_variation) {
    throw Error(ErrorCode::DegenerateTraining, "no query group has two distinct labels");
  }

  const FlatData flat = flatten(train);
  const std::size_t n = flat.x.size();
  std::vector<double> scores(n, 0.0);
  std::vector<double> targets(n);
  std::vector<double> weights(n);
  if (trace) {
    trace->ndcg.assign(1, mean_group_ndcg(flat, scores, params.ndcg_truncation));
  }
  std::vector<RegressionTree> trees;
  trees.reserve(params.num_trees);
  const TreeParams tree_params{params.num_leaves, params.min_leaf_instances};
  for (std::size_t round = 0; round < params.num_trees; ++round) {
    for (std::size_t g = 0; g + 1 < flat.offsets.size(); ++g) {
      const auto begin = static_cast<std::ptrdiff_t>(flat.offsets[g]);
      const auto end = static_cast<std::ptrdiff_t>(flat.offsets[g + 1]);
      const auto grad = group_gradients(
          std::vector<int>(flat.labels.begin() + begin, flat.labels.begin() + end),
          std::vector<double>(scores.begin() + begin, scores.begin() + end),
          std::vector<std::string>(flat.doc_ids.begin() + begin, flat.doc_ids.begin() + end),
          params.ndcg_truncation, params.sigma);
      for (std::size_t i = 0; i < grad.lambdas.size(); ++i) {
        targets[static_cast<std::size_t>(begin) + i] = -grad.lambdas[i];
        weights[static_cast<std::size_t>(begin) + i] = grad.weights[i];
      }
    }
    RegressionTree tree = fit_regression_tree(flat.x, targets, weights, tree_params);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += params.learning_rate * tree.evaluate(flat.x[i]);
    }
    trees.push_back(std::move(tree));
    if (trace) {
      trace->ndcg.push_back(mean_group_ndcg(flat, scores, params.ndcg_truncation));
    }
  }
  return EnsembleModel(params.learning_rate, std::move(trees));
}

CandidateList rerank(const CandidateList& candidates,
                     const std::map<std::string, FeatureVector>& features,
                     const EnsembleModel& model) {
  CandidateList out;
  out.query_id = candidates.query_id;
  out.entries.reserve(candidates.entries.size());
  for (const auto& c : candidates.entries) {
    auto it = features.find(c.doc_id);
    if (it == features.end()) {
      throw Error(ErrorCode::MissingFeatures, "no features for candidate " + c.doc_id);
    }
    out.entries.push_back({c.doc_id, model.predict(it->second)});
  }
  std::sort(out.entries.begin(), out.entries.end(), ranks_before);
  return out;
}

// ---- Model file ---------------------------------------------------------

namespace {
constexpr std::string_view kModelMagic = "lambdamart-model v1";
}

void write_model(const std::string& path, const EnsembleModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  out << kModelMagic << '\n'
      << "feature_count " << model.feature_count() << '\n'
      << "learning_rate " << format_double(model.learning_rate()) << '\n'
      << "num_trees " << model.trees().size() << '\n';
  for (const auto& tree : model.trees()) {
    out << "tree " << tree.nodes().size() << '\n';
    // Nodes are stored in pre-order, so the list can be written as is.
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) {
        out << "leaf " << format_double(node.value) << '\n';
      } else {
        out << "split " << (node.feature + 1) << ' ' << format_double(node.threshold) << '\n';
      }
    }
  }
}

EnsembleModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingArtifact, "cannot read model " + path);
  }
  std::size_t line_no = 0;
  auto next_line = [&](std::string& line) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::ParseError, path + ": unexpected end of model file");
    }
    ++line_no;
  };
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + what);
  };
  auto keyed = [&](const char* key) {
    std::string line;
    next_line(line);
    std::istringstream ls(line);
    std::string k, v;
    if (!(ls >> k >> v) || k != key) throw fail(std::string("expected ") + key);
    return v;
  };
  std::string line;
  next_line(line);
  if (line != kModelMagic) {
    throw fail("not a LambdaMART model file");
  }
  const auto feature_count = static_cast<std::size_t>(parse_int(keyed("feature_count")));
  const double learning_rate = parse_double(keyed("learning_rate"));
  const auto num_trees = static_cast<std::size_t>(parse_int(keyed("num_trees")));

  std::vector<RegressionTree> trees;
  for (std::size_t t = 0; t < num_trees; ++t) {
    const auto count = static_cast<std::size_t>(parse_int(keyed("tree")));
    std::vector<RegressionTree::Node> nodes;
    for (std::size_t k = 0; k < count; ++k) {
      next_line(line);
      std::istringstream ls(line);
      std::string kind;
      ls >> kind;
      RegressionTree::Node node;
      std::string a, b;
      if (kind == "leaf" && (ls >> a)) {
        node.value = parse_double(a);
      } else if (kind == "split" && (ls >> a >> b)) {
        node.feature = static_cast<int>(parse_int(a)) - 1;
        node.threshold = parse_double(b);
        if (node.feature < 0) throw fail("feature slots are 1-based");
      } else {
        throw fail("expected 'leaf <value>' or 'split <slot> <threshold>'");
      }
      nodes.push_back(node);
    }
    // Rebuild child links from the pre-order listing.
    std::size_t pos = 0;
    auto link = [&](auto&& self) -> int {
      if (pos >= nodes.size()) throw fail("truncated tree");
      const int idx = static_cast<int>(pos++);
      if (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const int left = self(self);
        const int right = self(self);
        nodes[static_cast<std::size_t>(idx)].left = left;
        nodes[static_cast<std::size_t>(idx)].right = right;
      }
      return idx;
    };
    link(link);
    if (pos != nodes.size()) {
      throw fail("tree node count does not match its structure");
    }
    trees.emplace_back(std::move(nodes));
  }
  return EnsembleModel(learning_rate, std::move(trees), feature_count);
}

}  // namespace tradrank
