#pragma once

// Unit-scale graphs of level slices and their normalized-Laplacian spectra.

#include <cstddef>
#include <utility>
#include <vector>

#include "warpcone/warpgraph.hpp"

namespace warpcone {

/// Unweighted undirected graph in CSR form, sorted neighbour lists.
class UnitScaleGraph {
 public:
  UnitScaleGraph() = default;
  UnitScaleGraph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  std::size_t max_degree() const;
  std::size_t edge_count() const { return targets_.size() / 2; }
  const NodeId* begin(NodeId u) const { return targets_.data() + offsets_[u]; }
  const NodeId* end(NodeId u) const { return targets_.data() + offsets_[u + 1]; }
  bool has_edge(NodeId u, NodeId v) const;
  /// Component sizes, largest first.
  std::vector<std::size_t> component_sizes() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

/// Joins every pair with warped distance <= 1 + tol. Throws
/// ConstructionError listing component sizes when the result is disconnected.
UnitScaleGraph unit_graph(const WarpedGraph& g, double tol = 0.0);

struct SpectralOptions {
  double tol = 1e-10;  // eigen-residual
  std::size_t basis = 120;
  std::size_t max_restarts = 400;
};

struct Lambda1Result {
  double value;
  double residual;
  std::size_t matvecs;
  /// Unit eigenvector of D^-1/2 A D^-1/2 orthogonal to D^1/2 1.
  std::vector<double> eigenvector;
};

/// Second-smallest eigenvalue of the normalized Laplacian I - D^-1/2 A D^-1/2.
Lambda1Result lambda1_full(const UnitScaleGraph& ug, const SpectralOptions& options = {});
double lambda1(const UnitScaleGraph& ug, const SpectralOptions& options = {});

struct CheegerResult {
  double conductance;
  /// Best sweep prefix.
  NodeSet cut;
};
/// cut(S) / min(vol S, vol S^c), minimized over prefixes of the vertex order
/// by D^-1/2 times the Fiedler vector.
CheegerResult cheeger_sweep(const UnitScaleGraph& ug, const SpectralOptions& options = {});
CheegerResult cheeger_sweep(const UnitScaleGraph& ug, const std::vector<double>& eigenvector);

double conductance(const UnitScaleGraph& ug, const std::vector<std::uint8_t>& in_set);

}  // namespace warpcone
