#include "warpcone/warpgraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

#include "format.hpp"
#include "warpcone/errors.hpp"

namespace warpcone {

namespace {

constexpr double kBallSlack = 1e-12;

}  // namespace

WarpedGraph::WarpedGraph(std::shared_ptr<const Net> net, GroupAction action, double t, double radius,
                         GraphOptions options)
    : net_(std::move(net)), action_(std::move(action)), t_(t), radius_(radius) {
  if (!net_) throw DomainError("level graph needs a net");
  if (!(action_.space() == net_->space())) throw DomainError("action and net live on different spaces");
  if (!(t_ >= 1.0)) throw DomainError("level t must be >= 1");
  if (!(radius_ >= 2.0 * t_ * net_->mesh() * (1.0 - 1e-12))) {
    throw DomainError("metric-edge radius must be >= 2 t mesh");
  }

  const std::size_t n = net_->size();
  const auto& moves = action_.moves();
  move_count_ = moves.size();

  // Wormholes.
  forward_.resize(n * move_count_);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(n * move_count_);
  for (std::size_t u = 0; u < n; ++u) {
    const Point& p = net_->point(static_cast<NodeId>(u));
    for (std::size_t m = 0; m < move_count_; ++m) {
      const Point image = action_.apply_letter(moves[m].letter(), p);
      const SnapResult s = snap(*net_, image);
      max_snap_error_ = std::max(max_snap_error_, s.error);
      forward_[u * move_count_ + m] = s.node;
      if (s.node != u) pairs.emplace_back(std::min<NodeId>(u, s.node), std::max<NodeId>(u, s.node));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  wormhole_offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : pairs) {
    ++wormhole_offsets_[a + 1];
    ++wormhole_offsets_[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) wormhole_offsets_[i + 1] += wormhole_offsets_[i];
  wormhole_targets_.resize(2 * pairs.size());
  {
    std::vector<std::size_t> fill(wormhole_offsets_.begin(), wormhole_offsets_.end() - 1);
    for (const auto& [a, b] : pairs) {
      wormhole_targets_[fill[a]++] = b;
      wormhole_targets_[fill[b]++] = a;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(wormhole_targets_.begin() + static_cast<std::ptrdiff_t>(wormhole_offsets_[i]),
                wormhole_targets_.begin() + static_cast<std::ptrdiff_t>(wormhole_offsets_[i + 1]));
    }
  }
  pairs.clear();
  pairs.shrink_to_fit();

  // Metric adjacency: materialize when small enough.
  if (!options.force_lazy && n > 0) {
    std::vector<NodeId> buf;
    const std::size_t samples = std::min<std::size_t>(n, 64);
    std::size_t sampled_degree = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      lazy_metric_neighbors(static_cast<NodeId>(k * n / samples), buf);
      sampled_degree += buf.size();
    }
    const double estimate = static_cast<double>(sampled_degree) / static_cast<double>(samples) *
                            static_cast<double>(n);
    if (estimate <= static_cast<double>(options.explicit_edge_budget)) {
      std::vector<std::size_t> offsets(n + 1, 0);
      std::vector<NodeId> targets;
      std::vector<double> weights;
      targets.reserve(static_cast<std::size_t>(estimate * 1.1) + 16);
      for (std::size_t u = 0; u < n; ++u) {
        lazy_metric_neighbors(static_cast<NodeId>(u), buf);
        const Point& p = net_->point(static_cast<NodeId>(u));
        for (NodeId v : buf) {
          targets.push_back(v);
          weights.push_back(t_ * geodesic_unchecked(net_->space(), p, net_->point(v)));
        }
        offsets[u + 1] = targets.size();
      }
      metric_offsets_ = std::move(offsets);
      metric_targets_ = std::move(targets);
      metric_weights_ = std::move(weights);
    }
  }

  if (options.check_connected && n > 0) {
    std::vector<std::uint32_t> comp(n, UINT32_MAX);
    std::vector<std::size_t> sizes;
    std::vector<NodeId> rep;
    std::vector<NodeId> stack;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] != UINT32_MAX) continue;
      const auto id = static_cast<std::uint32_t>(sizes.size());
      sizes.push_back(0);
      rep.push_back(static_cast<NodeId>(s));
      comp[s] = id;
      stack.push_back(static_cast<NodeId>(s));
      while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        ++sizes[id];
        for_each_neighbor(u, [&](NodeId v, double, EdgeKind) {
          if (comp[v] == UINT32_MAX) {
            comp[v] = id;
            stack.push_back(v);
          }
        });
      }
    }
    if (sizes.size() > 1) {
      const auto smallest = static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
      throw ConstructionError("level graph at t=" + fmt_double(t_) + " is disconnected: " +
                              std::to_string(sizes.size()) + " components; smallest has " +
                              std::to_string(sizes[smallest]) + " node(s) and contains node " +
                              std::to_string(rep[smallest]));
    }
  }
}

void WarpedGraph::lazy_metric_neighbors(NodeId u, std::vector<NodeId>& out) const {
  net_->within(net_->point(u), radius_ / t_, out);
  out.erase(std::remove(out.begin(), out.end(), u), out.end());
}

std::vector<Edge> WarpedGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t u = 0; u < size(); ++u) {
    for_each_neighbor(static_cast<NodeId>(u), [&](NodeId v, double w, EdgeKind kind) {
      if (u < v) out.push_back({static_cast<NodeId>(u), v, w, kind});
    });
  }
  return out;
}

WarpedGraph build_level_graph(std::shared_ptr<const Net> net, const GroupAction& action, double t,
                              double radius, GraphOptions options) {
  return WarpedGraph(std::move(net), action, t, radius, options);
}

WarpedGraph build_scheduled_level(const SpaceSpec& space, const GroupAction& action, double t, double h0,
                                  double radius_factor, NetOptions net_options, GraphOptions options) {
  if (!(t >= 1.0)) throw DomainError("level t must be >= 1");
  const double mesh = h0 / t;
  auto net = std::make_shared<const Net>(make_net(space, mesh, net_options));
  return WarpedGraph(std::move(net), action, t, radius_factor * t * mesh, options);
}

// Dijkstra -------------------------------------------------------------------

Dijkstra::Dijkstra(const WarpedGraph& g, EdgeFilter filter)
    : g_(g),
      filter_(filter),
      dist_(g.size(), kInfinity),
      pred_(g.size(), 0),
      pred_kind_(g.size(), EdgeKind::metric),
      done_(g.size(), 0) {}

void Dijkstra::run(NodeId source, double limit, std::optional<NodeId> stop_at) {
  run_impl(source, limit, stop_at ? 1 : 0, stop_at ? &*stop_at : nullptr);
}

void Dijkstra::run_until(NodeId source, const std::vector<NodeId>& targets, double limit) {
  run_impl(source, limit, targets.size(), targets.data());
}

void Dijkstra::run_impl(NodeId source, double limit, std::size_t target_count, const NodeId* targets) {
  for (NodeId v : touched_) {
    dist_[v] = kInfinity;
    done_[v] = 0;
  }
  touched_.clear();
  settled_.clear();
  source_ = source;

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist_[source] = 0.0;
  pred_[source] = source;
  touched_.push_back(source);
  heap.emplace(0.0, source);
  const bool wormholes = filter_ == EdgeFilter::all;
  std::size_t pending = 0;
  if (target_count > 0) {
    if (wanted_.size() != dist_.size()) wanted_.assign(dist_.size(), 0);
    for (std::size_t i = 0; i < target_count; ++i) {
      if (!wanted_[targets[i]]) {
        wanted_[targets[i]] = 1;
        ++pending;
      }
    }
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done_[u] || d > dist_[u]) continue;
    done_[u] = 1;
    settled_.push_back(u);
    if (pending > 0 && wanted_[u]) {
      wanted_[u] = 0;
      if (--pending == 0) break;
    }
    g_.for_each_neighbor(
        u,
        [&](NodeId v, double w, EdgeKind kind) {
          const double nd = d + w;
          if (nd > limit || done_[v]) return;
          if (nd < dist_[v]) {
            if (dist_[v] == kInfinity) touched_.push_back(v);
            dist_[v] = nd;
            pred_[v] = u;
            pred_kind_[v] = kind;
            heap.emplace(nd, v);
          }
        },
        true, wormholes);
  }
  for (std::size_t i = 0; i < target_count; ++i) wanted_[targets[i]] = 0;
  // Tentative labels of unsettled nodes are not final distances.
  for (NodeId v : touched_) {
    if (!done_[v]) dist_[v] = kInfinity;
  }
}

std::vector<EdgeKind> Dijkstra::path_kinds(NodeId v) const {
  std::vector<EdgeKind> kinds;
  if (dist_[v] == kInfinity) return kinds;
  for (NodeId x = v; x != source_; x = pred_[x]) kinds.push_back(pred_kind_[x]);
  std::reverse(kinds.begin(), kinds.end());
  return kinds;
}

std::vector<NodeId> Dijkstra::path_nodes(NodeId v) const {
  std::vector<NodeId> nodes;
  if (dist_[v] == kInfinity) return nodes;
  for (NodeId x = v; x != source_; x = pred_[x]) nodes.push_back(x);
  nodes.push_back(source_);
  std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

double warped_distance(const WarpedGraph& g, NodeId u, NodeId v) {
  if (u >= g.size() || v >= g.size()) throw DomainError("node out of range");
  if (u == v) return 0.0;
  Dijkstra dj(g);
  dj.run(u, kInfinity, v);
  return dj.distance(v);
}

std::vector<double> distances_from(const WarpedGraph& g, NodeId source, EdgeFilter filter) {
  Dijkstra dj(g, filter);
  dj.run(source);
  std::vector<double> out(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) out[v] = dj.distance(static_cast<NodeId>(v));
  return out;
}

std::vector<BallEntry> warped_ball(const WarpedGraph& g, NodeId center, double radius) {
  Dijkstra dj(g);
  dj.run(center, radius + kBallSlack);
  std::vector<BallEntry> out;
  out.reserve(dj.settled().size());
  for (NodeId v : dj.settled()) out.push_back({v, dj.distance(v)});
  std::sort(out.begin(), out.end(), [](const BallEntry& a, const BallEntry& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.node < b.node);
  });
  return out;
}

DistanceMatrix all_pairs_oracle(const WarpedGraph& g, std::size_t max_nodes) {
  const std::size_t n = g.size();
  if (n > max_nodes) {
    throw ResourceError("oracle max_nodes=" + std::to_string(max_nodes),
                        "all-pairs oracle refused a graph of " + std::to_string(n) + " nodes");
  }
  DistanceMatrix m{n, std::vector<double>(n * n, kInfinity)};
  for (std::size_t i = 0; i < n; ++i) m.d[i * n + i] = 0.0;
  for (const Edge& e : g.edges()) {
    double& a = m.d[e.u * n + e.v];
    a = std::min(a, e.weight);
    m.d[e.v * n + e.u] = a;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = m.d[i * n + k];
      if (dik == kInfinity) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double cand = dik + m.d[k * n + j];
        if (cand < m.d[i * n + j]) m.d[i * n + j] = cand;
      }
    }
  return m;
}

DiameterResult diameter(const WarpedGraph& g, std::size_t exact_limit) {
  const std::size_t n = g.size();
  if (n == 0) return {0.0, true, 0, 0};
  Dijkstra dj(g);
  auto farthest = [&](NodeId src) {
    dj.run(src);
    NodeId best = src;
    double bd = 0.0;
    for (NodeId v : dj.settled()) {
      const double d = dj.distance(v);
      if (d > bd || (d == bd && v < best)) {
        bd = d;
        best = v;
      }
    }
    if (dj.settled().size() != n) bd = kInfinity;
    return std::pair{best, bd};
  };
  if (n <= exact_limit) {
    DiameterResult res{0.0, true, 0, 0};
    for (std::size_t s = 0; s < n; ++s) {
      const auto [v, d] = farthest(static_cast<NodeId>(s));
      if (d > res.value) res = {d, true, static_cast<NodeId>(s), v};
    }
    return res;
  }
  const auto [a, da] = farthest(0);
  (void)da;
  const auto [b, db] = farthest(a);
  return {db, false, a, b};
}

NodeSet nk_neighborhood(const WarpedGraph& g, const NodeSet& K, double k) {
  if (!(k >= 0.0)) throw DomainError("neighbourhood radius must be >= 0");
  std::vector<NodeId> centers(K.begin(), K.end());
  for (NodeId y : K) {
    if (y >= g.size()) throw DomainError("node out of range");
    g.for_each_neighbor(
        y, [&](NodeId v, double, EdgeKind) { centers.push_back(v); }, false, true);
  }
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  std::vector<std::uint8_t> in(g.size(), 0);
  std::vector<NodeId> buf;
  const double base_radius = k / g.level() + kBallSlack;
  for (NodeId c : centers) {
    g.net().within(g.net().point(c), base_radius, buf);
    for (NodeId x : buf) {
      if (g.level() * geodesic_unchecked(g.net().space(), g.net().point(c), g.net().point(x)) <= k + kBallSlack) in[x] = 1;
    }
  }
  NodeSet out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (in[i]) out.push_back(static_cast<NodeId>(i));
  return out;
}

CapacityResult epsilon_capacity(const WarpedGraph& g, NodeId center, double r, double eps) {
  if (!(r > 0.0) || !(eps > 0.0)) throw DomainError("capacity needs r > 0 and eps > 0");
  if (center >= g.size()) throw DomainError("node out of range");
  const auto ball = warped_ball(g, center, r);
  std::vector<std::uint8_t> blocked(g.size(), 0);
  Dijkstra dj(g);
  CapacityResult res{0, {}};
  // Nodes strictly closer than eps to a chosen node are excluded.
  const double block_radius = std::nextafter(eps, 0.0) - kBallSlack;
  for (const auto& entry : ball) {
    if (blocked[entry.node]) continue;
    res.chosen.push_back(entry.node);
    dj.run(entry.node, block_radius);
    for (NodeId v : dj.settled()) blocked[v] = 1;
  }
  res.count = res.chosen.size();
  return res;
}

void write_graph_csv(std::ostream& out, const WarpedGraph& g) {
  out << "u,v,weight,kind\n";
  for (const Edge& e : g.edges()) {
    out << e.u << ',' << e.v << ',' << fmt_double(e.weight) << ','
        << (e.kind == EdgeKind::metric ? "metric" : "wormhole") << '\n';
  }
}

}  // namespace warpcone
