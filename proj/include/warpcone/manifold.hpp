#pragma once

// Compact base spaces, finite nets on them, and nearest-node queries.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace warpcone {

using NodeId = std::uint32_t;

enum class SpaceKind { circle, sphere2, torus2, finite_set };

std::string to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string& name);

/// Coordinates in a base space. Only the leading components are used:
/// circle -> angle in [0, 2pi); torus2 -> (x, y) in [0,1)^2;
/// sphere2 -> unit vector (x, y, z); finite_set -> point index.
struct Point {
  std::array<double, 3> c{};

  double& operator[](std::size_t i) { return c[i]; }
  double operator[](std::size_t i) const { return c[i]; }
  bool operator==(const Point&) const = default;
};

/// Circle of circumference 2pi, unit sphere, flat unit-square torus, or a
/// finite set of `points` points with the discrete metric.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::circle;
  std::size_t points = 0;  // finite_set only

  static SpaceSpec circle() { return {SpaceKind::circle, 0}; }
  static SpaceSpec sphere2() { return {SpaceKind::sphere2, 0}; }
  static SpaceSpec torus2() { return {SpaceKind::torus2, 0}; }
  static SpaceSpec finite_set(std::size_t n) { return {SpaceKind::finite_set, n}; }

  std::size_t coordinate_count() const;
  double diameter() const;
  bool operator==(const SpaceSpec&) const = default;
};

/// Throws DomainError if `p` is not a valid point of `space`
/// (non-finite values, non-unit sphere vector beyond 1e-9, bad index).
void validate_point(const SpaceSpec& space, const Point& p);

/// Brings coordinates into canonical range (angles mod 2pi, torus mod 1,
/// sphere renormalized). Validates first.
Point canonicalize(const SpaceSpec& space, const Point& p);

/// Validates both points (DomainError) before measuring.
double geodesic(const SpaceSpec& space, const Point& p, const Point& q);
/// Same metric for coordinates already known to be valid.
double geodesic_unchecked(const SpaceSpec& space, const Point& p, const Point& q);

struct NetOptions {
  std::size_t max_nodes = 8'000'000;
  /// Nets of at least this many nodes answer nearest-node queries from the
  /// cell grid; smaller nets scan.
  std::size_t index_threshold = 4096;
};

class CellGrid;

/// A finite net of a base space: every point of the space is within `mesh`
/// of a node and distinct nodes are at least mesh/2 apart. Immutable.
class Net {
 public:
  Net(SpaceSpec space, double mesh, std::vector<Point> points, NetOptions options);
  ~Net();
  Net(Net&&) noexcept;
  Net& operator=(Net&&) noexcept;

  const SpaceSpec& space() const { return space_; }
  double mesh() const { return mesh_; }
  std::size_t size() const { return points_.size(); }
  const Point& point(NodeId i) const { return points_[i]; }
  std::span<const Point> points() const { return points_; }

  /// Nearest node by geodesic distance; ties (within 1e-12) go to the lowest
  /// index. Uses the scan or the cell grid depending on the net size.
  NodeId nearest(const Point& p) const;
  NodeId nearest_scan(const Point& p) const;
  NodeId nearest_indexed(const Point& p) const;

  /// Nodes within geodesic distance `radius` of `p`, ascending ids.
  std::vector<NodeId> within(const Point& p, double radius) const;
  void for_each_within(const Point& p, double radius,
                       const std::function<void(NodeId, double)>& visit) const;

  /// Sorted-id variant that reuses `out`; hot path for lazily built graphs.
  void within(const Point& p, double radius, std::vector<NodeId>& out) const;

 private:
  SpaceSpec space_;
  double mesh_;
  std::vector<Point> points_;
  NetOptions options_;
  std::unique_ptr<CellGrid> grid_;
};

/// Builds the deterministic net for `space` at covering radius `mesh`:
/// uniform grids on circle and torus, a Fibonacci spiral on the sphere, and
/// every point of a finite set.
Net make_net(const SpaceSpec& space, double mesh, NetOptions options = {});

struct SnapResult {
  NodeId node;
  double error;
};

SnapResult snap(const Net& net, const Point& p);

/// CSV dump: `node_id,coord...`.
void write_net_csv(std::ostream& out, const Net& net);

}  // namespace warpcone
