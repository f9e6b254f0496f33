#pragma once

// Level-t cross-sections of the warped cone as weighted graphs: metric edges
// carry t times the base geodesic, wormhole edges x <-> snap(s x) cost 1.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "warpcone/action.hpp"
#include "warpcone/manifold.hpp"

namespace warpcone {

enum class EdgeKind : std::uint8_t { metric, wormhole };

struct Edge {
  NodeId u;
  NodeId v;
  double weight;
  EdgeKind kind;
};

/// Sorted, duplicate-free set of node ids.
using NodeSet = std::vector<NodeId>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GraphOptions {
  /// Metric adjacency is materialized when its estimated size stays below
  /// this many entries; otherwise it is recomputed from the net on demand.
  std::size_t explicit_edge_budget = 40'000'000;
  bool check_connected = true;
  /// Forces the lazy metric adjacency (testing both paths).
  bool force_lazy = false;
};

class WarpedGraph {
 public:
  WarpedGraph(std::shared_ptr<const Net> net, GroupAction action, double t, double radius,
              GraphOptions options = {});

  std::size_t size() const { return net_->size(); }
  double level() const { return t_; }
  /// Metric-edge radius in scaled units.
  double radius() const { return radius_; }
  double mesh() const { return net_->mesh(); }
  /// Largest base-space distance between s x and the node it was snapped to.
  double max_snap_error() const { return max_snap_error_; }
  const Net& net() const { return *net_; }
  const std::shared_ptr<const Net>& net_ptr() const { return net_; }
  const GroupAction& action() const { return action_; }
  bool explicit_metric() const { return !metric_offsets_.empty(); }

  /// Node reached from `u` by the wormhole of move `m` (index into
  /// action().moves()). May equal `u` when the snap lands back on it.
  NodeId wormhole_target(NodeId u, std::size_t m) const { return forward_[u * move_count_ + m]; }
  std::size_t move_count() const { return move_count_; }

  /// Visits every edge at `u` as visit(v, weight, kind). Metric neighbours
  /// come first in ascending id order, then wormhole neighbours.
  template <typename Visit>
  void for_each_neighbor(NodeId u, Visit&& visit, bool include_metric = true,
                         bool include_wormholes = true) const {
    if (include_metric) {
      if (explicit_metric()) {
        for (std::size_t j = metric_offsets_[u]; j < metric_offsets_[u + 1]; ++j) {
          visit(metric_targets_[j], metric_weights_[j], EdgeKind::metric);
        }
      } else {
        thread_local std::vector<NodeId> buf;
        lazy_metric_neighbors(u, buf);
        const Point& p = net_->point(u);
        for (NodeId v : buf) visit(v, t_ * geodesic_unchecked(net_->space(), p, net_->point(v)), EdgeKind::metric);
      }
    }
    if (include_wormholes) {
      for (std::size_t j = wormhole_offsets_[u]; j < wormhole_offsets_[u + 1]; ++j) {
        visit(wormhole_targets_[j], 1.0, EdgeKind::wormhole);
      }
    }
  }

  /// Undirected edge list, u < v, metric edges then wormholes per node.
  std::vector<Edge> edges() const;
  std::size_t wormhole_edge_count() const { return wormhole_targets_.size() / 2; }

 private:
  void lazy_metric_neighbors(NodeId u, std::vector<NodeId>& out) const;

  std::shared_ptr<const Net> net_;
  GroupAction action_;
  double t_;
  double radius_;
  double max_snap_error_ = 0.0;
  std::size_t move_count_ = 0;
  std::vector<NodeId> forward_;
  std::vector<std::size_t> wormhole_offsets_;
  std::vector<NodeId> wormhole_targets_;
  std::vector<std::size_t> metric_offsets_;
  std::vector<NodeId> metric_targets_;
  std::vector<double> metric_weights_;
};

/// Builds Y_t on `net`. Requires t >= 1 and radius >= 2 t mesh. Throws
/// ConstructionError naming the smallest component if disconnected.
WarpedGraph build_level_graph(std::shared_ptr<const Net> net, const GroupAction& action, double t,
                              double radius, GraphOptions options = {});

/// Mesh schedule mesh(t) = h0 / t with metric radius factor * t * mesh.
WarpedGraph build_scheduled_level(const SpaceSpec& space, const GroupAction& action, double t, double h0,
                                  double radius_factor = 3.0, NetOptions net_options = {},
                                  GraphOptions options = {});

enum class EdgeFilter { all, metric_only };

/// Reusable single-source shortest-path solver over a WarpedGraph.
class Dijkstra {
 public:
  explicit Dijkstra(const WarpedGraph& g, EdgeFilter filter = EdgeFilter::all);

  /// Settles every node at distance <= limit. Stops once `stop_at` settles.
  void run(NodeId source, double limit = kInfinity, std::optional<NodeId> stop_at = std::nullopt);
  /// Stops once every node of `targets` has settled (or the limit is hit).
  void run_until(NodeId source, const std::vector<NodeId>& targets, double limit = kInfinity);

  double distance(NodeId v) const { return dist_[v]; }
  /// Settled nodes in nondecreasing distance order (ties by id).
  const std::vector<NodeId>& settled() const { return settled_; }
  /// Edge kinds along the recorded shortest path from the source to v.
  std::vector<EdgeKind> path_kinds(NodeId v) const;
  std::vector<NodeId> path_nodes(NodeId v) const;

 private:
  void run_impl(NodeId source, double limit, std::size_t target_count, const NodeId* targets);

  const WarpedGraph& g_;
  EdgeFilter filter_;
  NodeId source_ = 0;
  std::vector<double> dist_;
  std::vector<NodeId> pred_;
  std::vector<EdgeKind> pred_kind_;
  std::vector<NodeId> touched_;
  std::vector<NodeId> settled_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint8_t> wanted_;
};

double warped_distance(const WarpedGraph& g, NodeId u, NodeId v);
/// Full single-source distances (kInfinity where unreachable).
std::vector<double> distances_from(const WarpedGraph& g, NodeId source, EdgeFilter filter = EdgeFilter::all);

struct BallEntry {
  NodeId node;
  double distance;
};
/// Nodes with d <= radius (1e-12 slack), sorted by (distance, id).
std::vector<BallEntry> warped_ball(const WarpedGraph& g, NodeId center, double radius);

/// Dense row-major distance matrix.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;
  double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

/// Floyd-Warshall over edges(); independent of Dijkstra. Capped at 512 nodes.
DistanceMatrix all_pairs_oracle(const WarpedGraph& g, std::size_t max_nodes = 512);

struct DiameterResult {
  double value;
  bool exact;  // false: double-sweep lower bound
  NodeId from;
  NodeId to;
};
DiameterResult diameter(const WarpedGraph& g, std::size_t exact_limit = 4096);

/// Nodes within scaled distance k of K or of the snapped generator translates
/// of K. Translates are the wormhole neighbours of K's nodes, in both edge
/// directions, so every wormhole step of a path is covered.
NodeSet nk_neighborhood(const WarpedGraph& g, const NodeSet& K, double k);

struct CapacityResult {
  std::size_t count;
  std::vector<NodeId> chosen;
};
/// Greedy maximal eps-separated subset (pairwise d >= eps) of the warped
/// r-ball around center, scanned in (distance, id) order.
CapacityResult epsilon_capacity(const WarpedGraph& g, NodeId center, double r, double eps);

/// CSV dump `u,v,weight,kind`.
void write_graph_csv(std::ostream& out, const WarpedGraph& g);

}  // namespace warpcone
