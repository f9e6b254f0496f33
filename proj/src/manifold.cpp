#include "warpcone/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "format.hpp"
#include "warpcone/errors.hpp"

namespace warpcone {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTieTol = 1e-12;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  if (r >= period) r -= period;
  return r;
}

double periodic_gap(double a, double b, double period) {
  double d = std::fabs(a - b);
  d = std::fmod(d, period);
  return std::min(d, period - d);
}

// ceil(x) that does not round 8.000000000001 up to 9.
std::size_t robust_ceil(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::circle: return "circle";
    case SpaceKind::sphere2: return "sphere2";
    case SpaceKind::torus2: return "torus2";
    case SpaceKind::finite_set: return "finite-set";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string& name) {
  if (name == "circle") return SpaceKind::circle;
  if (name == "sphere2" || name == "sphere") return SpaceKind::sphere2;
  if (name == "torus2" || name == "torus") return SpaceKind::torus2;
  if (name == "finite-set" || name == "finite_set") return SpaceKind::finite_set;
  throw DomainError("unknown space kind '" + name + "'");
}

std::size_t SpaceSpec::coordinate_count() const {
  switch (kind) {
    case SpaceKind::circle: return 1;
    case SpaceKind::sphere2: return 3;
    case SpaceKind::torus2: return 2;
    case SpaceKind::finite_set: return 1;
  }
  return 0;
}

double SpaceSpec::diameter() const {
  switch (kind) {
    case SpaceKind::circle: return std::numbers::pi;
    case SpaceKind::sphere2: return std::numbers::pi;
    case SpaceKind::torus2: return std::sqrt(0.5);
    case SpaceKind::finite_set: return points > 1 ? 1.0 : 0.0;
  }
  return 0.0;
}

void validate_point(const SpaceSpec& space, const Point& p) {
  for (std::size_t i = 0; i < space.coordinate_count(); ++i) {
    if (!std::isfinite(p[i])) throw DomainError("non-finite coordinate");
  }
  switch (space.kind) {
    case SpaceKind::sphere2: {
      const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (std::fabs(norm - 1.0) > 1e-9) {
        throw DomainError("sphere2 point is not a unit vector (norm " + std::to_string(norm) + ")");
      }
      break;
    }
    case SpaceKind::finite_set: {
      const double idx = p[0];
      if (idx < 0 || idx != std::floor(idx) || idx >= static_cast<double>(space.points)) {
        throw DomainError("finite-set point index out of range");
      }
      break;
    }
    default: break;
  }
}

Point canonicalize(const SpaceSpec& space, const Point& p) {
  validate_point(space, p);
  Point q = p;
  switch (space.kind) {
    case SpaceKind::circle: q[0] = wrap(p[0], kTwoPi); break;
    case SpaceKind::torus2:
      q[0] = wrap(p[0], 1.0);
      q[1] = wrap(p[1], 1.0);
      break;
    case SpaceKind::sphere2: {
      const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      for (int i = 0; i < 3; ++i) q[i] = p[i] / norm;
      break;
    }
    case SpaceKind::finite_set: break;
  }
  return q;
}

double geodesic(const SpaceSpec& space, const Point& p, const Point& q) {
  validate_point(space, p);
  validate_point(space, q);
  return geodesic_unchecked(space, p, q);
}

double geodesic_unchecked(const SpaceSpec& space, const Point& p, const Point& q) {
  switch (space.kind) {
    case SpaceKind::circle: return periodic_gap(p[0], q[0], kTwoPi);
    case SpaceKind::torus2: {
      const double dx = periodic_gap(p[0], q[0], 1.0);
      const double dy = periodic_gap(p[1], q[1], 1.0);
      return std::sqrt(dx * dx + dy * dy);
    }
    case SpaceKind::sphere2: {
      // atan2 form stays accurate for nearly equal and nearly antipodal points.
      const double cx = p[1] * q[2] - p[2] * q[1];
      const double cy = p[2] * q[0] - p[0] * q[2];
      const double cz = p[0] * q[1] - p[1] * q[0];
      const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
      const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
      return std::atan2(cross, dot);
    }
    case SpaceKind::finite_set: return p[0] == q[0] ? 0.0 : 1.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Cell grid. Periodic uniform cells for circle/torus, latitude bands split
// into longitude cells for the sphere. Candidates are a superset of the
// points within the query radius.

class CellGrid {
 public:
  CellGrid(const SpaceSpec& space, double mesh, std::span<const Point> points) : kind_(space.kind) {
    if (kind_ == SpaceKind::sphere2) {
      const double target = 2.0 * mesh;
      bands_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::numbers::pi / target)));
      band_height_ = std::numbers::pi / static_cast<double>(bands_);
      band_start_.resize(bands_ + 1, 0);
      band_cells_.resize(bands_);
      for (std::size_t b = 0; b < bands_; ++b) {
        // Widest circle in the band sets the cell count so cells stay ~square.
        const double lo = band_height_ * static_cast<double>(b);
        const double hi = lo + band_height_;
        const double widest = (lo <= std::numbers::pi / 2 && hi >= std::numbers::pi / 2)
                                  ? 1.0
                                  : std::max(std::sin(lo), std::sin(hi));
        band_cells_[b] = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(kTwoPi * widest / target)));
        band_start_[b + 1] = band_start_[b] + band_cells_[b];
      }
      cell_count_ = band_start_[bands_];
    } else {
      dims_ = space.coordinate_count();
      period_ = kind_ == SpaceKind::circle ? kTwoPi : 1.0;
      const std::size_t per_dim =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(period_ / mesh)));
      cells_per_dim_ = per_dim;
      width_ = period_ / static_cast<double>(per_dim);
      cell_count_ = dims_ == 1 ? per_dim : per_dim * per_dim;
    }

    std::vector<std::size_t> cell_of(points.size());
    offsets_.assign(cell_count_ + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = cell_id(points[i]);
      ++offsets_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < cell_count_; ++c) offsets_[c + 1] += offsets_[c];
    members_.resize(points.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
      members_[fill[cell_of[i]]++] = static_cast<NodeId>(i);
    }
  }

  template <typename Visit>
  void candidates(const Point& p, double radius, Visit&& visit) const {
    if (kind_ == SpaceKind::sphere2) {
      sphere_candidates(p, radius, visit);
    } else {
      periodic_candidates(p, radius, visit);
    }
  }

 private:
  std::size_t periodic_cell(double x) const {
    auto k = static_cast<std::size_t>(std::floor(wrap(x, period_) / width_));
    return std::min(k, cells_per_dim_ - 1);
  }

  std::size_t cell_id(const Point& p) const {
    if (kind_ == SpaceKind::sphere2) {
      const auto [b, k] = sphere_cell(p);
      return band_start_[b] + k;
    }
    if (dims_ == 1) return periodic_cell(p[0]);
    return periodic_cell(p[0]) * cells_per_dim_ + periodic_cell(p[1]);
  }

  static double polar(const Point& p) { return std::acos(std::clamp(p[2], -1.0, 1.0)); }
  static double azimuth(const Point& p) { return wrap(std::atan2(p[1], p[0]), kTwoPi); }

  std::pair<std::size_t, std::size_t> sphere_cell(const Point& p) const {
    const auto b = std::min(bands_ - 1, static_cast<std::size_t>(std::floor(polar(p) / band_height_)));
    const double cw = kTwoPi / static_cast<double>(band_cells_[b]);
    const auto k = std::min(band_cells_[b] - 1, static_cast<std::size_t>(std::floor(azimuth(p) / cw)));
    return {b, k};
  }

  template <typename Visit>
  void emit(std::size_t cell, Visit& visit) const {
    for (std::size_t j = offsets_[cell]; j < offsets_[cell + 1]; ++j) visit(members_[j]);
  }

  // Cell indices [lo, hi] along one periodic axis, deduplicated.
  void axis_range(double x, double radius, std::vector<std::size_t>& out) const {
    out.clear();
    const auto lo = static_cast<long long>(std::floor((x - radius) / width_));
    const auto hi = static_cast<long long>(std::floor((x + radius) / width_));
    const auto n = static_cast<long long>(cells_per_dim_);
    if (hi - lo + 1 >= n) {
      for (long long k = 0; k < n; ++k) out.push_back(static_cast<std::size_t>(k));
      return;
    }
    for (long long k = lo; k <= hi; ++k) out.push_back(static_cast<std::size_t>(((k % n) + n) % n));
  }

  template <typename Visit>
  void periodic_candidates(const Point& p, double radius, Visit& visit) const {
    thread_local std::vector<std::size_t> xs, ys;
    axis_range(wrap(p[0], period_), radius, xs);
    if (dims_ == 1) {
      for (auto cx : xs) emit(cx, visit);
      return;
    }
    axis_range(wrap(p[1], period_), radius, ys);
    for (auto cx : xs)
      for (auto cy : ys) emit(cx * cells_per_dim_ + cy, visit);
  }

  template <typename Visit>
  void sphere_candidates(const Point& p, double radius, Visit& visit) const {
    if (radius >= std::numbers::pi) {
      for (std::size_t c = 0; c < cell_count_; ++c) emit(c, visit);
      return;
    }
    const double theta = polar(p);
    const double phi = azimuth(p);
    const double chord = 2.0 * std::sin(radius / 2.0);
    const double th_lo = std::max(0.0, theta - radius);
    const double th_hi = std::min(std::numbers::pi, theta + radius);
    const auto b_lo = std::min(bands_ - 1, static_cast<std::size_t>(std::floor(th_lo / band_height_)));
    const auto b_hi = std::min(bands_ - 1, static_cast<std::size_t>(std::floor(th_hi / band_height_)));
    const double rho_p = std::sin(theta);
    for (std::size_t b = b_lo; b <= b_hi; ++b) {
      const std::size_t nc = band_cells_[b];
      const double lo = std::max(th_lo, band_height_ * static_cast<double>(b));
      const double hi = std::min(th_hi, band_height_ * static_cast<double>(b + 1));
      const double rho_q = std::min(std::sin(lo), std::sin(hi));
      // |q - p| >= 2 sqrt(rho_p rho_q) sin(dphi / 2).
      const double denom = 2.0 * std::sqrt(std::max(0.0, rho_p * rho_q));
      bool all = nc == 1 || denom <= chord;
      double dphi = 0.0;
      if (!all) {
        dphi = 2.0 * std::asin(std::min(1.0, chord / denom));
        all = dphi >= std::numbers::pi;
      }
      const std::size_t base = band_start_[b];
      if (all) {
        for (std::size_t k = 0; k < nc; ++k) emit(base + k, visit);
        continue;
      }
      const double cw = kTwoPi / static_cast<double>(nc);
      const auto lo_k = static_cast<long long>(std::floor((phi - dphi) / cw));
      const auto hi_k = static_cast<long long>(std::floor((phi + dphi) / cw));
      const auto n = static_cast<long long>(nc);
      if (hi_k - lo_k + 1 >= n) {
        for (std::size_t k = 0; k < nc; ++k) emit(base + k, visit);
        continue;
      }
      for (long long k = lo_k; k <= hi_k; ++k) emit(base + static_cast<std::size_t>(((k % n) + n) % n), visit);
    }
  }

  SpaceKind kind_;
  std::size_t cell_count_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> members_;
  // periodic
  std::size_t dims_ = 0;
  std::size_t cells_per_dim_ = 1;
  double period_ = 1.0;
  double width_ = 1.0;
  // sphere
  std::size_t bands_ = 1;
  double band_height_ = std::numbers::pi;
  std::vector<std::size_t> band_start_;
  std::vector<std::size_t> band_cells_;
};

// ---------------------------------------------------------------------------

Net::Net(SpaceSpec space, double mesh, std::vector<Point> points, NetOptions options)
    : space_(space), mesh_(mesh), points_(std::move(points)), options_(options) {
  if (space_.kind != SpaceKind::finite_set) {
    grid_ = std::make_unique<CellGrid>(space_, mesh_, points_);
  }
}

Net::~Net() = default;
Net::Net(Net&&) noexcept = default;
Net& Net::operator=(Net&&) noexcept = default;

namespace {

struct Best {
  NodeId node = 0;
  double dist = std::numeric_limits<double>::infinity();
  bool found = false;

  void offer(NodeId i, double d) {
    if (!found || d < dist - kTieTol || (d <= dist + kTieTol && i < node)) {
      node = i;
      dist = d;
      found = true;
    }
  }
};

}  // namespace

NodeId Net::nearest_scan(const Point& p) const {
  validate_point(space_, p);
  if (space_.kind == SpaceKind::finite_set) return static_cast<NodeId>(p[0]);
  Best best;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    best.offer(static_cast<NodeId>(i), geodesic_unchecked(space_, p, points_[i]));
  }
  return best.node;
}

NodeId Net::nearest_indexed(const Point& p) const {
  validate_point(space_, p);
  if (space_.kind == SpaceKind::finite_set) return static_cast<NodeId>(p[0]);
  thread_local std::vector<NodeId> cand;
  double radius = mesh_;
  for (;;) {
    cand.clear();
    grid_->candidates(p, radius, [&](NodeId i) { cand.push_back(i); });
    std::sort(cand.begin(), cand.end());
    Best best;
    for (NodeId i : cand) {
      const double d = geodesic_unchecked(space_, p, points_[i]);
      if (d <= radius) best.offer(i, d);
    }
    if (best.found && best.dist + 4 * kTieTol <= radius) return best.node;
    if (radius >= space_.diameter()) return nearest_scan(p);
    radius *= 2.0;
  }
}

NodeId Net::nearest(const Point& p) const {
  if (points_.size() < options_.index_threshold) return nearest_scan(p);
  return nearest_indexed(p);
}

void Net::within(const Point& p, double radius, std::vector<NodeId>& out) const {
  out.clear();
  if (space_.kind == SpaceKind::finite_set) {
    if (radius >= 1.0) {
      for (std::size_t i = 0; i < points_.size(); ++i) out.push_back(static_cast<NodeId>(i));
    } else if (radius >= 0.0) {
      out.push_back(static_cast<NodeId>(p[0]));
    }
    return;
  }
  if (space_.kind == SpaceKind::sphere2 && radius < std::numbers::pi) {
    // Chord prefilter; the exact geodesic only decides near the boundary.
    const double chord = 2.0 * std::sin(radius / 2.0);
    const double inner = chord * chord * (1.0 - 1e-9);
    const double outer = chord * chord * (1.0 + 1e-9);
    grid_->candidates(p, radius, [&](NodeId i) {
      const Point& q = points_[i];
      const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
      const double c2 = dx * dx + dy * dy + dz * dz;
      if (c2 <= inner || (c2 <= outer && geodesic_unchecked(space_, p, q) <= radius)) out.push_back(i);
    });
  } else {
    grid_->candidates(p, radius, [&](NodeId i) {
      if (geodesic_unchecked(space_, p, points_[i]) <= radius) out.push_back(i);
    });
  }
  std::sort(out.begin(), out.end());
}

std::vector<NodeId> Net::within(const Point& p, double radius) const {
  validate_point(space_, p);
  std::vector<NodeId> out;
  within(p, radius, out);
  return out;
}

void Net::for_each_within(const Point& p, double radius,
                          const std::function<void(NodeId, double)>& visit) const {
  for (NodeId i : within(p, radius)) visit(i, geodesic_unchecked(space_, p, points_[i]));
}

Net make_net(const SpaceSpec& space, double mesh, NetOptions options) {
  if (!(mesh > 0.0)) throw DomainError("mesh must be positive");
  if (space.kind == SpaceKind::finite_set && space.points == 0) {
    throw DomainError("finite-set space needs at least one point");
  }
  if (space.kind != SpaceKind::finite_set && !(mesh < space.diameter())) {
    throw DomainError("mesh must be smaller than the diameter of " + to_string(space.kind));
  }

  std::size_t n = 0;
  switch (space.kind) {
    case SpaceKind::circle: n = robust_ceil(kTwoPi / mesh); break;
    case SpaceKind::torus2: {
      const std::size_t m = robust_ceil(1.0 / mesh);
      n = m * m;
      break;
    }
    case SpaceKind::sphere2: n = robust_ceil(4.0 * std::numbers::pi / (mesh * mesh)); break;
    case SpaceKind::finite_set: n = space.points; break;
  }
  if (n > options.max_nodes) {
    throw ResourceError("max_nodes=" + std::to_string(options.max_nodes),
                        "net of " + std::to_string(n) + " nodes requested for mesh " + std::to_string(mesh));
  }

  std::vector<Point> pts(n);
  switch (space.kind) {
    case SpaceKind::circle:
      for (std::size_t j = 0; j < n; ++j) pts[j][0] = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      break;
    case SpaceKind::torus2: {
      const std::size_t m = robust_ceil(1.0 / mesh);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          pts[i * m + j][0] = static_cast<double>(i) / static_cast<double>(m);
          pts[i * m + j][1] = static_cast<double>(j) / static_cast<double>(m);
        }
      break;
    }
    case SpaceKind::sphere2: {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = std::fmod(golden * static_cast<double>(i), kTwoPi);
        pts[i] = Point{{r * std::cos(phi), r * std::sin(phi), z}};
      }
      break;
    }
    case SpaceKind::finite_set:
      for (std::size_t j = 0; j < n; ++j) pts[j][0] = static_cast<double>(j);
      break;
  }
  return Net(space, mesh, std::move(pts), options);
}

SnapResult snap(const Net& net, const Point& p) {
  const NodeId node = net.nearest(p);
  return {node, geodesic_unchecked(net.space(), p, net.point(node))};
}

void write_net_csv(std::ostream& out, const Net& net) {
  const char* header = "node_id,angle";
  switch (net.space().kind) {
    case SpaceKind::circle: header = "node_id,angle"; break;
    case SpaceKind::torus2: header = "node_id,x,y"; break;
    case SpaceKind::sphere2: header = "node_id,x,y,z"; break;
    case SpaceKind::finite_set: header = "node_id,index"; break;
  }
  out << header << '\n';
  const std::size_t dims = net.space().coordinate_count();
  for (std::size_t i = 0; i < net.size(); ++i) {
    out << i;
    for (std::size_t d = 0; d < dims; ++d) out << ',' << fmt_double(net.point(static_cast<NodeId>(i))[d]);
    out << '\n';
  }
}

}  // namespace warpcone
