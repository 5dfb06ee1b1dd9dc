#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/transport.hpp"

namespace kslab {

namespace {

// Primal network simplex for the uncapacitated transportation problem. Arcs 0..m*n-1 are the
// bipartite arcs i -> m + j; arc m*n + u joins node u with the artificial root.
class Simplex {
 public:
  Simplex(const std::vector<double>& supply, const std::vector<double>& demand, const Eigen::MatrixXd& cost)
      : m_(static_cast<int>(supply.size())), n_(static_cast<int>(demand.size())), cost_(cost) {
    nodes_ = m_ + n_;
    root_ = nodes_;
    real_arcs_ = static_cast<long>(m_) * n_;
    const long arcs = real_arcs_ + nodes_;
    flow_.assign(arcs, 0.0);
    src_.resize(arcs);
    dst_.resize(arcs);
    arc_cost_.resize(arcs);
    in_tree_.assign(arcs, 0);
    double cmax = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost(i, j)));
    eps_ = 1e-13 * std::max(1.0, cmax);
    const double big = (cmax + 1.0) * (nodes_ + 1);
    for (long e = 0; e < real_arcs_; ++e) {
      src_[e] = static_cast<int>(e / n_);
      dst_[e] = m_ + static_cast<int>(e % n_);
      arc_cost_[e] = cost(src_[e], dst_[e] - m_);
    }
    for (int u = 0; u < nodes_; ++u) {
      const long e = real_arcs_ + u;
      const double b = u < m_ ? supply[u] : -demand[u - m_];
      if (b >= 0.0) {
        src_[e] = u;
        dst_[e] = root_;
        arc_cost_[e] = 0.0;
        flow_[e] = b;
      } else {
        src_[e] = root_;
        dst_[e] = u;
        arc_cost_[e] = big;
        flow_[e] = -b;
      }
      in_tree_[e] = 1;
    }
    parent_.assign(nodes_ + 1, -1);
    pred_.assign(nodes_ + 1, -1);
    up_.assign(nodes_ + 1, 0);
    depth_.assign(nodes_ + 1, 0);
    pi_.assign(nodes_ + 1, 0.0);
    adj_.resize(nodes_ + 1);
    rebuild();
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  void run() {
    while (true) {
      const long in = find_entering();
      if (in < 0) break;
      pivot(in);
      ++pivots_;
    }
  }

  ExactPlan plan() const {
    ExactPlan p;
    std::vector<double> terms;
    for (long e = 0; e < real_arcs_; ++e)
      if (flow_[e] > 0.0) {
        p.from.push_back(static_cast<std::size_t>(src_[e]));
        p.to.push_back(static_cast<std::size_t>(dst_[e] - m_));
        p.mass.push_back(flow_[e]);
        terms.push_back(flow_[e] * arc_cost_[e]);
      }
    p.cost = pairwise_sum(terms);
    p.pivots = pivots_;
    return p;
  }

  double artificial_flow() const {
    double s = 0.0;
    for (int u = 0; u < nodes_; ++u) s += flow_[real_arcs_ + u];
    return s;
  }

 private:
  double reduced(long e) const { return arc_cost_[e] + pi_[src_[e]] - pi_[dst_[e]]; }

  long find_entering() {
    const long arcs = real_arcs_;
    long best = -1;
    double best_val = -eps_;
    long in_block = 0;
    for (long c = 0; c < arcs; ++c) {
      const long e = (next_ + c) % arcs;
      if (!in_tree_[e]) {
        const double r = reduced(e);
        if (r < best_val) {
          best_val = r;
          best = e;
        }
      }
      if (++in_block == block_) {
        in_block = 0;
        if (best >= 0) {
          next_ = (e + 1) % arcs;
          return best;
        }
      }
    }
    if (best >= 0) next_ = (best + 1) % arcs;
    return best;
  }

  void pivot(long in) {
    // Cycle: in-arc from first to second, then up from second to the join, down to first.
    const int first = src_[in], second = dst_[in];
    int a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b])
        a = parent_[a];
      else
        b = parent_[b];
    }
    const int join = a;
    const double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    int u_out = -1;
    for (int u = first; u != join; u = parent_[u]) {
      const double d = up_[u] ? flow_[pred_[u]] : inf;
      if (d < delta) {
        delta = d;
        u_out = u;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      const double d = up_[u] ? inf : flow_[pred_[u]];
      if (d <= delta) {
        delta = d;
        u_out = u;
      }
    }
    if (u_out < 0) fail(Errc::non_convergence, "network simplex: unbounded cycle");
    if (delta > 0.0) {
      flow_[in] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? -delta : delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? delta : -delta;
    }
    const long out = pred_[u_out];
    in_tree_[out] = 0;
    flow_[out] = 0.0;
    in_tree_[in] = 1;
    *std::find(tree_list_.begin(), tree_list_.end(), out) = in;
    rebuild();
  }

  void rebuild() {
    for (auto& v : adj_) v.clear();
    if (tree_list_.empty())
      for (long e = 0; e < static_cast<long>(in_tree_.size()); ++e)
        if (in_tree_[e]) tree_list_.push_back(e);
    for (long e : tree_list_) {
      adj_[src_[e]].push_back(e);
      adj_[dst_[e]].push_back(e);
    }
    std::vector<int> stack{root_};
    std::vector<char> seen(nodes_ + 1, 0);
    seen[root_] = 1;
    parent_[root_] = -1;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (long e : adj_[u]) {
        const int w = src_[e] == u ? dst_[e] : src_[e];
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = u;
        pred_[w] = e;
        up_[w] = src_[e] == w;
        depth_[w] = depth_[u] + 1;
        pi_[w] = up_[w] ? pi_[u] - arc_cost_[e] : pi_[u] + arc_cost_[e];
        stack.push_back(w);
      }
    }
  }

  int m_, n_, nodes_, root_;
  long real_arcs_;
  const Eigen::MatrixXd& cost_;
  std::vector<double> flow_, arc_cost_;
  std::vector<int> src_, dst_;
  std::vector<char> in_tree_;
  std::vector<long> tree_list_;
  std::vector<int> parent_, depth_;
  std::vector<long> pred_;
  std::vector<char> up_;
  std::vector<double> pi_;
  std::vector<std::vector<long>> adj_;
  double eps_ = 0.0;
  long block_ = 10;
  long next_ = 0;
  long pivots_ = 0;
};

}  // namespace

ExactPlan network_simplex(const std::vector<double>& supply, const std::vector<double>& demand,
                          const Eigen::MatrixXd& cost) {
  if (supply.empty() || demand.empty()) fail(Errc::invalid_argument, "network_simplex: empty marginal");
  if (cost.rows() != static_cast<long>(supply.size()) || cost.cols() != static_cast<long>(demand.size()))
    fail(Errc::invalid_argument, "network_simplex: cost matrix shape does not match the marginals");
  for (double s : supply)
    if (!(s >= 0.0)) fail(Errc::negative_input, "network_simplex: negative supply");
  for (double d : demand)
    if (!(d >= 0.0)) fail(Errc::negative_input, "network_simplex: negative demand");
  const double ts = pairwise_sum(supply), td = pairwise_sum(demand);
  if (std::abs(ts - td) > 1e-10 * std::max(ts, td)) fail(Errc::mass_mismatch, "network_simplex: unbalanced marginals");
  // Absorb the rounding residue so that the problem is exactly balanced in floating point.
  std::vector<double> dem(demand);
  const auto jmax = std::max_element(dem.begin(), dem.end()) - dem.begin();
  double rest = 0.0;
  for (std::size_t j = 0; j < dem.size(); ++j)
    if (static_cast<long>(j) != jmax) rest += dem[j];
  double sum_s = 0.0;
  for (double s : supply) sum_s += s;
  dem[jmax] = std::max(0.0, sum_s - rest);
  Simplex sx(supply, dem, cost);
  sx.run();
  if (sx.artificial_flow() > 1e-9 * std::max(ts, 1e-300))
    fail(Errc::non_convergence, "network_simplex: artificial arcs still carry flow");
  return sx.plan();
}

}  // namespace kslab
