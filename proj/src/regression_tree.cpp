#include <algorithm>
#include <numeric>

#include "tradrank/error.hpp"
#include "tradrank/ltr.hpp"

namespace tradrank {

RegressionTree::RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "regression tree without nodes");
  }
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (!node.is_leaf() && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
      throw Error(ErrorCode::InvalidArgument, "regression tree node with a missing child");
    }
  }
}

double RegressionTree::evaluate(std::span<const double> x) const {
  std::size_t idx = 0;
  while (!nodes_[idx].is_leaf()) {
    const auto& node = nodes_[idx];
    idx = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                       ? node.left
                                       : node.right);
  }
  return nodes_[idx].value;
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

struct GrowingLeaf {
  std::vector<std::size_t> samples;
  int node = 0;
  Split best;
};

Split find_best_split(const std::vector<FeatureVector>& x, const std::vector<double>& targets,
                      const std::vector<std::size_t>& samples, std::size_t min_leaf) {
  Split best;
  const std::size_t n = samples.size();
  if (n < 2 * min_leaf || n < 2) {
    return best;
  }
  double total = 0.0;
  for (auto s : samples) total += targets[s];
  const double base = total * total / static_cast<double>(n);

  std::vector<std::size_t> order(samples);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
    double left_sum = 0.0;
    for (std::size_t p = 1; p < n; ++p) {
      left_sum += targets[order[p - 1]];
      const double lo = x[order[p - 1]][f];
      const double hi = x[order[p]][f];
      if (!(lo < hi) || p < min_leaf || n - p < min_leaf) {
        continue;
      }
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(p) +
                          right_sum * right_sum / static_cast<double>(n - p) - base;
      if (gain > best.gain) {
        double mid = lo + (hi - lo) / 2.0;
        if (!(mid < hi)) mid = lo;
        best.feature = static_cast<int>(f);
        best.threshold = mid;
        best.gain = gain;
      }
    }
  }
  if (best.feature >= 0) {
    for (auto s : samples) {
      (x[s][static_cast<std::size_t>(best.feature)] <= best.threshold ? best.left : best.right)
          .push_back(s);
    }
  }
  return best;
}

double leaf_value(const std::vector<double>& targets, const std::vector<double>& weights,
                  const std::vector<std::size_t>& samples) {
  double num = 0.0;
  double den = 0.0;
  for (auto s : samples) {
    num += targets[s];
    den += weights[s];
  }
  return den > 0.0 ? num / den : 0.0;
}

// Renumbers nodes so that they are stored in pre-order.
std::vector<RegressionTree::Node> to_preorder(const std::vector<RegressionTree::Node>& nodes) {
  std::vector<RegressionTree::Node> out;
  out.reserve(nodes.size());
  auto visit = [&](auto&& self, int idx) -> int {
    const int pos = static_cast<int>(out.size());
    out.push_back(nodes[static_cast<std::size_t>(idx)]);
    if (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
      const int left = self(self, nodes[static_cast<std::size_t>(idx)].left);
      const int right = self(self, nodes[static_cast<std::size_t>(idx)].right);
      out[static_cast<std::size_t>(pos)].left = left;
      out[static_cast<std::size_t>(pos)].right = right;
    }
    return pos;
  };
  visit(visit, 0);
  return out;
}

}  // namespace

RegressionTree fit_regression_tree(const std::vector<FeatureVector>& x,
                                   const std::vector<double>& targets,
                                   const std::vector<double>& weights, const TreeParams& params) {
  if (x.size() != targets.size() || x.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "tree inputs differ in length");
  }
  if (params.num_leaves < 1 || params.min_leaf_instances < 1) {
    throw Error(ErrorCode::InvalidArgument, "num_leaves and min_leaf_instances must be >= 1");
  }
  std::vector<RegressionTree::Node> nodes(1);
  std::vector<GrowingLeaf> leaves(1);
  leaves[0].samples.resize(x.size());
  std::iota(leaves[0].samples.begin(), leaves[0].samples.end(), 0);
  leaves[0].best = find_best_split(x, targets, leaves[0].samples, params.min_leaf_instances);

  while (leaves.size() < params.num_leaves) {
    std::size_t pick = leaves.size();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].best.feature >= 0 && (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain)) {
        pick = i;
      }
    }
    if (pick == leaves.size()) {
      break;
    }
    GrowingLeaf parent = std::move(leaves[pick]);
    auto& node = nodes[static_cast<std::size_t>(parent.node)];
    node.feature = parent.best.feature;
    node.threshold = parent.best.threshold;
    node.left = static_cast<int>(nodes.size());
    node.right = static_cast<int>(nodes.size() + 1);
    const int left_node = node.left;
    const int right_node = node.right;
    nodes.emplace_back();
    nodes.emplace_back();

    GrowingLeaf left{std::move(parent.best.left), left_node, {}};
    GrowingLeaf right{std::move(parent.best.right), right_node, {}};
    left.best = find_best_split(x, targets, left.samples, params.min_leaf_instances);
    right.best = find_best_split(x, targets, right.samples, params.min_leaf_instances);
    leaves[pick] = std::move(left);
    leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(pick) + 1, std::move(right));
  }
  for (const auto& leaf : leaves) {
    nodes[static_cast<std::size_t>(leaf.node)].value = leaf_value(targets, weights, leaf.samples);
  }
  return RegressionTree(to_preorder(nodes));
}

}  // namespace tradrank
