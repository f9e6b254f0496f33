#pragma once

// Property-A witnesses (node-indexed probability measures), Følner
// convolution, positive-type kernels and their restriction to group words.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "warpcone/action.hpp"
#include "warpcone/warpgraph.hpp"

namespace warpcone {

/// Finitely supported probability measure on nodes, atoms sorted by node.
class SparseMeasure {
 public:
  SparseMeasure() = default;
  /// Merges duplicate nodes and drops zero masses. Throws DomainError on
  /// negative masses or a total differing from 1 by more than 1e-9.
  explicit SparseMeasure(std::vector<std::pair<NodeId, double>> atoms);

  static SparseMeasure dirac(NodeId x) { return SparseMeasure({{x, 1.0}}); }
  static SparseMeasure uniform(const std::vector<NodeId>& nodes);

  const std::vector<std::pair<NodeId, double>>& atoms() const { return atoms_; }
  double mass_of(NodeId x) const;
  double total() const;

 private:
  std::vector<std::pair<NodeId, double>> atoms_;
};

/// L1 distance sum |a(z) - b(z)| over the union of supports.
double total_variation(const SparseMeasure& a, const SparseMeasure& b);

struct WitnessMap {
  std::vector<SparseMeasure> measures;  // one per node
  double radius = 0.0;                  // declared localization radius
};

WitnessMap dirac_witness(const WarpedGraph& g);
/// Uniform measure on all nodes at every node.
WitnessMap uniform_witness(const WarpedGraph& g);
/// Uniform on nodes within scaled base distance w (t * geodesic <= w).
/// The declared radius is the measured warped localization radius.
WitnessMap window_witness(const WarpedGraph& g, double w);
/// Uniform on the warped ball B(x, r).
WitnessMap ball_witness(const WarpedGraph& g, double r);

/// Probability measure on group words. The same measure serves every node
/// (the amenable groups used here have group Følner sequences).
struct FolnerFamily {
  GroupModel group;
  std::size_t n = 0;
  std::vector<std::pair<Word, double>> atoms;

  std::size_t max_length() const;
};

/// Z: uniform on a^0..a^(n-1); Z^2: uniform on the n x n box a^i b^j;
/// cyclic and trivial groups: uniform on the whole group. DomainError for
/// groups without a Følner family.
FolnerFamily folner_measures(const GroupModel& group, std::size_t n);

/// Group element of a word in coordinates of the model (exponent sums,
/// reduced mod the order for cyclic groups).
std::array<long long, 2> group_coordinates(const GroupModel& group, const Word& w);

/// ||mu - gamma . mu||_1 computed on group elements.
double shift_norm(const FolnerFamily& mu, const Word& gamma);

struct ConvolutionResult {
  WitnessMap witness;
  /// max over nodes x and words gamma in supp mu of
  /// d(x, snap(gamma x)) - |gamma|, clipped at 0.
  double translation_defect = 0.0;
};

/// result(x) = sum_gamma mu{gamma} f(snap(gamma x)). The declared radius is
/// r_f + max |gamma| + translation defect.
ConvolutionResult convolve_witness(const FolnerFamily& mu, const WitnessMap& f, const WarpedGraph& g);

/// max over node pairs with d <= s of ||f(x) - f(y)||_1.
double variation_statistic(const WitnessMap& f, const WarpedGraph& g, double s);
/// max over x and z in supp f(x) of d(x, z).
double localization_radius(const WitnessMap& f, const WarpedGraph& g);

/// Symmetric kernel on a node subset; entry (i, j) belongs to
/// (nodes[i], nodes[j]).
struct KernelMatrix {
  NodeSet nodes;
  Eigen::MatrixXd values;

  std::size_t size() const { return nodes.size(); }
};

using KernelFunction = std::function<double(NodeId, NodeId)>;

/// k(x, y) = sum_z sqrt(f(x){z} f(y){z}) on `nodes`.
KernelMatrix kernel_from_witness(const WitnessMap& f, const NodeSet& nodes);
/// The same kernel evaluated on demand, for graphs too large for a matrix.
KernelFunction witness_kernel(const WitnessMap& f);

/// k = W l W^T for a row-stochastic weight table W (rows: lifted points,
/// columns: lattice points of l). `nodes` labels the lifted points.
KernelMatrix kernel_lift(const KernelMatrix& l, const Eigen::MatrixXd& weights, const NodeSet& nodes = {});

struct PsdResult {
  double min_eigenvalue;
  bool positive_type;
};
/// Dense eigensolve up to 1024 nodes, Lanczos above. DomainError if the
/// matrix is asymmetric beyond 1e-9.
PsdResult psd_check(const KernelMatrix& k, double tol = 1e-8);

/// max d(x, y) over pairs with |k(x, y)| > cutoff. Searches first to
/// `search_limit` from each node and falls back to a full search when a
/// supported pair lies beyond it.
double controlled_support_radius(const KernelMatrix& k, const WarpedGraph& g, double cutoff = 1e-9,
                                 double search_limit = kInfinity);

/// Kernel known to vanish on pairs farther apart than `base_support` in the
/// base metric.
struct LocalKernel {
  KernelFunction value;
  double base_support;
};

/// kernel_from_witness(window_witness(g, w)) evaluated on demand.
LocalKernel window_kernel(const WarpedGraph& g, double w);

struct GroupValue {
  Word word;
  double value;
  std::size_t nonzero_nodes;  // nodes x with k(x, snap(gamma x)) != 0
};

struct GroupFunction {
  std::vector<GroupValue> values;

  /// Throws DomainError when the word was not evaluated.
  double at(const Word& w) const;
};

/// h(gamma) = mean over nodes x of k(x, snap(gamma x)).
GroupFunction haar_restrict(const KernelFunction& k, const WarpedGraph& g, const std::vector<Word>& words);
/// Matrix form; the kernel must cover every node of g in order.
GroupFunction haar_restrict(const KernelMatrix& k, const WarpedGraph& g, const std::vector<Word>& words);
/// Skips the snap wherever gamma x is too far from x for the kernel to be
/// nonzero; same values as the general form.
GroupFunction haar_restrict(const LocalKernel& k, const WarpedGraph& g, const std::vector<Word>& words);

struct NegativeTypeResult {
  /// Largest eigenvalue of k compressed to mean-zero vectors.
  double max_eigenvalue;
  bool negative_type;
};
/// DomainError on asymmetry or a diagonal entry beyond tol.
NegativeTypeResult negative_type_check(const KernelMatrix& k, double tol = 1e-9);

struct ModulusBucket {
  double lo;  // warped distance in [lo, lo + width)
  std::size_t pairs;
  double min_embedded;  // empirical rho_1
  double max_embedded;  // empirical rho_2
};
/// Embedded distance sqrt(2 - 2 k) bucketed by warped distance. Requires a
/// unit diagonal.
std::vector<ModulusBucket> compression_moduli(const KernelMatrix& k, const WarpedGraph& g, double width = 1.0);

void write_witness_csv(std::ostream& out, const WitnessMap& f);
void write_kernel_csv(std::ostream& out, const KernelMatrix& k);
void write_group_function_csv(std::ostream& out, const GroupFunction& h);

}  // namespace warpcone
