#include "warpcone/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "linalg.hpp"
#include "warpcone/errors.hpp"

namespace warpcone {

UnitScaleGraph::UnitScaleGraph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::vector<std::pair<NodeId, NodeId>> e;
  e.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw DomainError("edge endpoint out of range");
    if (u == v) continue;
    e.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  offsets_.assign(n + 1, 0);
  for (auto [u, v] : e) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  targets_.resize(2 * e.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (auto [u, v] : e) {
    targets_[fill[u]++] = v;
    targets_[fill[v]++] = u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

std::size_t UnitScaleGraph::max_degree() const {
  std::size_t d = 0;
  for (std::size_t u = 0; u < size(); ++u) d = std::max(d, degree(static_cast<NodeId>(u)));
  return d;
}

bool UnitScaleGraph::has_edge(NodeId u, NodeId v) const { return std::binary_search(begin(u), end(u), v); }

std::vector<std::size_t> UnitScaleGraph::component_sizes() const {
  const std::size_t n = size();
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> sizes;
  std::vector<NodeId> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::size_t count = 0;
    seen[s] = 1;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++count;
      for (const NodeId* p = begin(u); p != end(u); ++p) {
        if (!seen[*p]) {
          seen[*p] = 1;
          stack.push_back(*p);
        }
      }
    }
    sizes.push_back(count);
  }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

UnitScaleGraph unit_graph(const WarpedGraph& g, double tol) {
  if (!(tol >= 0.0 && tol <= 0.5)) throw DomainError("unit-graph tolerance must lie in [0, 0.5]");
  std::vector<std::pair<NodeId, NodeId>> edges;
  Dijkstra dj(g);
  const double limit = 1.0 + tol + 1e-12;
  for (std::size_t u = 0; u < g.size(); ++u) {
    dj.run(static_cast<NodeId>(u), limit);
    for (NodeId v : dj.settled()) {
      if (v > u) edges.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  UnitScaleGraph ug(g.size(), edges);
  const auto sizes = ug.component_sizes();
  if (sizes.size() > 1) {
    std::string list;
    for (std::size_t i = 0; i < sizes.size() && i < 16; ++i) list += (i ? "," : "") + std::to_string(sizes[i]);
    if (sizes.size() > 16) list += ",...";
    throw ConstructionError("unit-scale graph is disconnected: " + std::to_string(sizes.size()) +
                            " components of sizes " + list);
  }
  return ug;
}

Lambda1Result lambda1_full(const UnitScaleGraph& ug, const SpectralOptions& options) {
  const std::size_t n = ug.size();
  if (n < 2) throw DomainError("lambda1 needs at least two nodes");
  std::vector<double> inv_sqrt(n), top(n);
  double vol = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto d = static_cast<double>(ug.degree(static_cast<NodeId>(u)));
    if (d == 0.0) throw DomainError("lambda1 needs a graph without isolated nodes");
    inv_sqrt[u] = 1.0 / std::sqrt(d);
    top[u] = std::sqrt(d);
    vol += d;
  }
  for (double& x : top) x /= std::sqrt(vol);

  const detail::Operator M = [&](const detail::Vec& x, detail::Vec& y) {
    for (std::size_t u = 0; u < n; ++u) {
      double s = 0.0;
      for (const NodeId* p = ug.begin(static_cast<NodeId>(u)); p != ug.end(static_cast<NodeId>(u)); ++p) {
        s += inv_sqrt[*p] * x[*p];
      }
      y[u] = inv_sqrt[u] * s;
    }
  };
  detail::LanczosOptions lo{options.tol, options.basis, options.max_restarts};
  auto pair = detail::lanczos(M, n, detail::Extreme::largest, {top}, detail::cosine_start(n), lo);
  return {1.0 - pair.value, pair.residual, pair.matvecs, std::move(pair.vector)};
}

double lambda1(const UnitScaleGraph& ug, const SpectralOptions& options) { return lambda1_full(ug, options).value; }

double conductance(const UnitScaleGraph& ug, const std::vector<std::uint8_t>& in_set) {
  double vol_in = 0.0, vol_out = 0.0, cut = 0.0;
  for (std::size_t u = 0; u < ug.size(); ++u) {
    const auto d = static_cast<double>(ug.degree(static_cast<NodeId>(u)));
    (in_set[u] ? vol_in : vol_out) += d;
    if (!in_set[u]) continue;
    for (const NodeId* p = ug.begin(static_cast<NodeId>(u)); p != ug.end(static_cast<NodeId>(u)); ++p) {
      if (!in_set[*p]) cut += 1.0;
    }
  }
  const double denom = std::min(vol_in, vol_out);
  return denom > 0.0 ? cut / denom : kInfinity;
}

CheegerResult cheeger_sweep(const UnitScaleGraph& ug, const std::vector<double>& eigenvector) {
  const std::size_t n = ug.size();
  if (eigenvector.size() != n) throw DomainError("eigenvector length mismatch");
  std::vector<double> key(n);
  double vol = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto d = static_cast<double>(ug.degree(static_cast<NodeId>(u)));
    key[u] = eigenvector[u] / std::sqrt(d);
    vol += d;
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(),
            [&](NodeId a, NodeId b) { return key[a] < key[b] || (key[a] == key[b] && a < b); });

  std::vector<std::uint8_t> in(n, 0);
  double vol_in = 0.0, cut = 0.0;
  double best = kInfinity;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const NodeId u = order[k];
    in[u] = 1;
    double inside = 0.0;
    for (const NodeId* p = ug.begin(u); p != ug.end(u); ++p) inside += in[*p] ? 1.0 : 0.0;
    const auto d = static_cast<double>(ug.degree(u));
    // The edges to earlier members stop being cut; the rest become cut.
    cut += d - 2.0 * inside;
    vol_in += d;
    const double phi = cut / std::min(vol_in, vol - vol_in);
    if (phi < best - 1e-15) {
      best = phi;
      best_k = k + 1;
    }
  }
  CheegerResult res{best, NodeSet(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_k))};
  std::sort(res.cut.begin(), res.cut.end());
  return res;
}

CheegerResult cheeger_sweep(const UnitScaleGraph& ug, const SpectralOptions& options) {
  return cheeger_sweep(ug, lambda1_full(ug, options).eigenvector);
}

}  // namespace warpcone
