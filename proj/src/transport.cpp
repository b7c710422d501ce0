#include "gml/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gml {
namespace {

constexpr double kFlowTol = 1e-12;
constexpr double kDegenerateTheta = 1e-14;

// Primal network simplex state on the complete bipartite graph with
// nodes 0..d-1 (sources, supply r) and d..2d-1 (sinks, demand c).
// Arc id i*d+j is the edge source i -> sink j.
struct Simplex {
  int d, n;
  const Matrix& cost;
  const Vector& r;
  const Vector& c;

  std::vector<char> in_tree;  // per arc id
  std::vector<int> parent, parent_arc, depth, order;
  std::vector<double> flow;  // flow[v] = flow on parent_arc[v]
  std::vector<double> pot;
  std::vector<double> excess;
  std::vector<int> adj_head, adj_next, adj_node, adj_arc;

  Simplex(const Matrix& cost_, const Vector& r_, const Vector& c_)
      : d(static_cast<int>(r_.size())),
        n(2 * d),
        cost(cost_),
        r(r_),
        c(c_),
        in_tree(static_cast<size_t>(d) * d, 0),
        parent(n),
        parent_arc(n),
        depth(n),
        flow(n),
        pot(n),
        excess(n),
        adj_head(n),
        adj_next(2 * (n - 1)),
        adj_node(2 * (n - 1)),
        adj_arc(2 * (n - 1)) {
    order.reserve(n);
  }

  void northwest_corner() {
    std::fill(in_tree.begin(), in_tree.end(), 0);
    int i = 0, j = 0;
    double a = r[0], b = c[0];
    while (true) {
      in_tree[i * d + j] = 1;
      double m = std::min(a, b);
      a -= m;
      b -= m;
      bool last_i = (i == d - 1), last_j = (j == d - 1);
      if (last_i && last_j) break;
      if (!last_i && (a <= b || last_j)) {
        ++i;
        a = r[i];
      } else {
        ++j;
        b = c[j];
      }
    }
  }

  // Rebuilds parent/depth/order from the in_tree arcs. False if they do not
  // span all 2d nodes.
  bool load_tree() {
    std::fill(adj_head.begin(), adj_head.end(), -1);
    int slot = 0;
    auto link = [&](int u, int v, int a) {
      adj_node[slot] = v;
      adj_arc[slot] = a;
      adj_next[slot] = adj_head[u];
      adj_head[u] = slot++;
    };
    for (int a = 0; a < d * d; ++a) {
      if (!in_tree[a]) continue;
      if (slot + 2 > static_cast<int>(adj_node.size())) return false;
      int u = a / d, v = d + a % d;
      link(u, v, a);
      link(v, u, a);
    }
    if (slot != 2 * (n - 1)) return false;

    order.clear();
    std::fill(parent.begin(), parent.end(), -2);
    parent[0] = -1;
    parent_arc[0] = -1;
    depth[0] = 0;
    order.push_back(0);
    for (size_t head = 0; head < order.size(); ++head) {
      int u = order[head];
      for (int s = adj_head[u]; s >= 0; s = adj_next[s]) {
        int v = adj_node[s];
        if (parent[v] != -2) continue;
        parent[v] = u;
        parent_arc[v] = adj_arc[s];
        depth[v] = depth[u] + 1;
        order.push_back(v);
      }
    }
    return static_cast<int>(order.size()) == n;
  }

  // Exact basic flows by leaf elimination; returns the minimum before any
  // clamping so a warm start can detect marginals it does not fit.
  double compute_flows() {
    for (int v = 0; v < n; ++v) excess[v] = v < d ? r[v] : -c[v - d];
    double min_flow = 0.0;
    flow[0] = 0.0;
    for (size_t k = order.size(); k-- > 1;) {
      int v = order[k];
      double f = v < d ? excess[v] : -excess[v];
      flow[v] = f;
      min_flow = std::min(min_flow, f);
      excess[parent[v]] += excess[v];
    }
    return min_flow;
  }

  void clamp_flows() {
    for (int v = 1; v < n; ++v) {
      if (flow[v] < 0.0) {
        if (flow[v] < -kFlowTol)
          throw std::runtime_error("solve_transport: negative basic flow");
        flow[v] = 0.0;
      }
    }
  }

  void compute_potentials() {
    pot[0] = 0.0;
    for (size_t k = 1; k < order.size(); ++k) {
      int v = order[k];
      int a = parent_arc[v];
      pot[v] = cost(a / d, a % d) - pot[parent[v]];
    }
  }

  double reduced_cost(int a) const {
    return cost(a / d, a % d) - pot[a / d] - pot[d + a % d];
  }

  int run_pivots(double eps_opt) {
    const long max_pivots = 100L * d * d + 1000;
    int pivots = 0;
    int consecutive_degenerate = 0;
    bool bland = false;
    while (true) {
      int enter = -1;
      if (!bland) {
        double best = -eps_opt;
        for (int a = 0; a < d * d; ++a) {
          if (in_tree[a]) continue;
          double rc = reduced_cost(a);
          if (rc < best) {
            best = rc;
            enter = a;
          }
        }
      } else {
        for (int a = 0; a < d * d; ++a) {
          if (!in_tree[a] && reduced_cost(a) < -eps_opt) {
            enter = a;
            break;
          }
        }
      }
      if (enter < 0) return pivots;
      if (++pivots > max_pivots)
        throw std::runtime_error("solve_transport: pivot limit exceeded");

      // The entering arc closes one cycle through the tree path between its
      // endpoints. Arcs whose flow decreases when theta units are pushed are
      // exactly: source-side parent arcs on the tail branch, sink-side parent
      // arcs on the head branch.
      int x = enter / d, y = d + enter % d;
      double theta = std::numeric_limits<double>::infinity();
      int leave_node = -1, leave_arc = std::numeric_limits<int>::max();
      auto consider = [&](int v) {
        double f = flow[v];
        int a = parent_arc[v];
        if (f < theta || (f == theta && a < leave_arc)) {
          theta = f;
          leave_node = v;
          leave_arc = a;
        }
      };
      while (depth[x] > depth[y]) {
        if (x < d) consider(x);
        x = parent[x];
      }
      while (depth[y] > depth[x]) {
        if (y >= d) consider(y);
        y = parent[y];
      }
      while (x != y) {
        if (x < d) consider(x);
        if (y >= d) consider(y);
        x = parent[x];
        y = parent[y];
      }
      if (leave_node < 0)
        throw std::runtime_error("solve_transport: no leaving arc");

      if (theta <= kDegenerateTheta) {
        if (++consecutive_degenerate > 2 * d) bland = true;
      } else {
        consecutive_degenerate = 0;
        bland = false;
      }

      in_tree[enter] = 1;
      in_tree[leave_arc] = 0;
      if (!load_tree())
        throw std::runtime_error("solve_transport: basis exchange broke tree");
      compute_flows();
      clamp_flows();
      compute_potentials();
    }
  }
};

}  // namespace

SolveResult solve_transport(const Matrix& cost, const Histogram& r,
                            const Histogram& c, const TransportBasis* warm) {
  const int d = r.dim();
  require_same_dim(r, c);
  if (cost.rows() != d || cost.cols() != d)
    throw std::invalid_argument("solve_transport: cost shape mismatch");
  if (!cost.allFinite())
    throw std::invalid_argument("solve_transport: cost has non-finite entries");

  Simplex s(cost, r.values(), c.values());
  bool warm_started = false;
  if (warm) {
    const auto& arcs = warm->arcs;
    if (static_cast<int>(arcs.size()) != 2 * d - 1)
      throw std::invalid_argument("solve_transport: basis has wrong arc count");
    std::fill(s.in_tree.begin(), s.in_tree.end(), 0);
    for (int a : arcs) {
      if (a < 0 || a >= d * d || s.in_tree[a])
        throw std::invalid_argument("solve_transport: malformed basis arc");
      s.in_tree[a] = 1;
    }
    if (!s.load_tree())
      throw std::invalid_argument("solve_transport: basis is not a tree");
    if (s.compute_flows() >= -kFlowTol) {
      warm_started = true;
    }
  }
  if (!warm_started) {
    s.northwest_corner();
    if (!s.load_tree())
      throw std::runtime_error("solve_transport: cold basis invalid");
    s.compute_flows();
  }
  s.clamp_flows();
  s.compute_potentials();

  double eps_opt = 1e-12 * std::max(1.0, cost.cwiseAbs().maxCoeff());
  int pivots = s.run_pivots(eps_opt);

  SolveResult res;
  res.pivots = pivots;
  res.warm_started = warm_started;
  res.plan.plan = Matrix::Zero(d, d);
  double value = 0.0;
  for (int v = 1; v < s.n; ++v) {
    int a = s.parent_arc[v];
    res.plan.plan(a / d, a % d) = s.flow[v];
    value += s.flow[v] * cost(a / d, a % d);
  }
  res.plan.value = value;
  res.basis.arcs.reserve(2 * d - 1);
  for (int a = 0; a < d * d; ++a)
    if (s.in_tree[a]) res.basis.arcs.push_back(a);
  return res;
}

double emd(const MetricMatrix& metric, const Histogram& r,
           const Histogram& c) {
  return solve_transport(metric.matrix(), r, c).plan.value;
}

TransportPlan brute_force_transport(const Matrix& cost, const Histogram& r,
                                    const Histogram& c) {
  const int d = r.dim();
  require_same_dim(r, c);
  if (cost.rows() != d || cost.cols() != d)
    throw std::invalid_argument("brute_force_transport: cost shape mismatch");
  if (d > 5)
    throw std::invalid_argument("brute_force_transport: d must be <= 5");

  const int n_arcs = d * d, k = 2 * d - 1, n = 2 * d;
  std::vector<int> comb(k);
  for (int t = 0; t < k; ++t) comb[t] = t;

  std::vector<int> uf(n);
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  std::vector<int> parent(n), parent_arc(n), order;
  std::vector<double> excess(n);
  order.reserve(n);

  auto find = [&](int v) {
    while (uf[v] != v) v = uf[v];
    return v;
  };

  double best_value = std::numeric_limits<double>::infinity();
  Matrix best_plan;

  while (true) {
    for (int v = 0; v < n; ++v) uf[v] = v;
    bool tree = true;
    for (int t = 0; t < k && tree; ++t) {
      int a = comb[t];
      int ru = find(a / d), rv = find(d + a % d);
      if (ru == rv)
        tree = false;
      else
        uf[ru] = rv;
    }
    if (tree) {
      for (auto& lst : adj) lst.clear();
      for (int t = 0; t < k; ++t) {
        int a = comb[t];
        adj[a / d].push_back({d + a % d, a});
        adj[d + a % d].push_back({a / d, a});
      }
      order.clear();
      std::fill(parent.begin(), parent.end(), -2);
      parent[0] = -1;
      order.push_back(0);
      for (size_t head = 0; head < order.size(); ++head) {
        int u = order[head];
        for (auto [v, a] : adj[u]) {
          if (parent[v] != -2) continue;
          parent[v] = u;
          parent_arc[v] = a;
          order.push_back(v);
        }
      }
      for (int v = 0; v < n; ++v)
        excess[v] = v < d ? r.values()[v] : -c.values()[v - d];
      bool feasible = true;
      double value = 0.0;
      Matrix plan = Matrix::Zero(d, d);
      for (size_t t = order.size(); t-- > 1;) {
        int v = order[t];
        double f = v < d ? excess[v] : -excess[v];
        if (f < -kFlowTol) {
          feasible = false;
          break;
        }
        if (f < 0.0) f = 0.0;
        int a = parent_arc[v];
        plan(a / d, a % d) = f;
        value += f * cost(a / d, a % d);
        excess[parent[v]] += excess[v];
      }
      if (feasible && value < best_value) {
        best_value = value;
        best_plan = std::move(plan);
      }
    }
    int idx = k - 1;
    while (idx >= 0 && comb[idx] == n_arcs - k + idx) --idx;
    if (idx < 0) break;
    ++comb[idx];
    for (int t = idx + 1; t < k; ++t) comb[t] = comb[t - 1] + 1;
  }
  if (!std::isfinite(best_value))
    throw std::runtime_error("brute_force_transport: no feasible basis");
  return {std::move(best_plan), best_value};
}

}  // namespace gml
