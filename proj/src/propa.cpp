#include "warpcone/propa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "format.hpp"
#include "linalg.hpp"
#include "warpcone/errors.hpp"

namespace warpcone {

namespace {

constexpr double kSlack = 1e-12;

double sqrt_overlap(const SparseMeasure& a, const SparseMeasure& b) {
  const auto& x = a.atoms();
  const auto& y = b.atoms();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      s += std::sqrt(x[i].second * y[j].second);
      ++i;
      ++j;
    }
  }
  return s;
}

void check_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw DomainError("kernel matrix is not square");
  const double asym = m.rows() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) throw DomainError("kernel matrix is asymmetric by " + fmt_double(asym));
}

}  // namespace

// Measures --------------------------------------------------------------------

SparseMeasure::SparseMeasure(std::vector<std::pair<NodeId, double>> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [node, mass] : atoms) {
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("measure mass must be finite and >= 0");
    total += mass;
    if (mass == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().first == node) {
      atoms_.back().second += mass;
    } else {
      atoms_.emplace_back(node, mass);
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("measure total mass " + fmt_double(total) + " is not 1");
}

SparseMeasure SparseMeasure::uniform(const std::vector<NodeId>& nodes) {
  if (nodes.empty()) throw DomainError("uniform measure on an empty set");
  const double m = 1.0 / static_cast<double>(nodes.size());
  std::vector<std::pair<NodeId, double>> atoms;
  atoms.reserve(nodes.size());
  for (NodeId v : nodes) atoms.emplace_back(v, m);
  return SparseMeasure(std::move(atoms));
}

double SparseMeasure::mass_of(NodeId x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x, [](const auto& a, NodeId v) { return a.first < v; });
  return it != atoms_.end() && it->first == x ? it->second : 0.0;
}

double SparseMeasure::total() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.second;
  return s;
}

double total_variation(const SparseMeasure& a, const SparseMeasure& b) {
  const auto& x = a.atoms();
  const auto& y = b.atoms();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      s += x[i++].second;
    } else if (i == x.size() || y[j].first < x[i].first) {
      s += y[j++].second;
    } else {
      s += std::abs(x[i++].second - y[j++].second);
    }
  }
  return s;
}

// Witnesses -------------------------------------------------------------------

WitnessMap dirac_witness(const WarpedGraph& g) {
  WitnessMap f;
  f.measures.reserve(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) f.measures.push_back(SparseMeasure::dirac(static_cast<NodeId>(x)));
  f.radius = 0.0;
  return f;
}

WitnessMap uniform_witness(const WarpedGraph& g) {
  std::vector<NodeId> all(g.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  const SparseMeasure u = SparseMeasure::uniform(all);
  WitnessMap f;
  f.measures.assign(g.size(), u);
  f.radius = diameter(g).value;
  return f;
}

WitnessMap window_witness(const WarpedGraph& g, double w) {
  if (!(w >= 0.0)) throw DomainError("window width must be >= 0");
  WitnessMap f;
  f.measures.reserve(g.size());
  std::vector<NodeId> buf;
  for (std::size_t x = 0; x < g.size(); ++x) {
    g.net().within(g.net().point(static_cast<NodeId>(x)), w / g.level() + kSlack, buf);
    f.measures.push_back(SparseMeasure::uniform(buf));
  }
  f.radius = localization_radius(f, g);
  return f;
}

WitnessMap ball_witness(const WarpedGraph& g, double r) {
  if (!(r >= 0.0)) throw DomainError("ball radius must be >= 0");
  WitnessMap f;
  f.measures.reserve(g.size());
  Dijkstra dj(g);
  for (std::size_t x = 0; x < g.size(); ++x) {
    dj.run(static_cast<NodeId>(x), r + kSlack);
    f.measures.push_back(SparseMeasure::uniform(dj.settled()));
  }
  f.radius = r;
  return f;
}

// Følner families -------------------------------------------------------------

std::size_t FolnerFamily::max_length() const {
  std::size_t L = 0;
  for (const auto& a : atoms) L = std::max(L, a.first.length());
  return L;
}

FolnerFamily folner_measures(const GroupModel& group, std::size_t n) {
  if (n < 1) throw DomainError("Følner index must be >= 1");
  FolnerFamily mu{group, n, {}};
  auto power = [](int letter, std::size_t k) { return std::vector<int>(k, letter); };
  switch (group.kind) {
    case GroupKind::trivial:
      mu.atoms.emplace_back(Word::identity(), 1.0);
      break;
    case GroupKind::integers:
      for (std::size_t k = 0; k < n; ++k) mu.atoms.emplace_back(Word(power(1, k)), 1.0 / static_cast<double>(n));
      break;
    case GroupKind::integers2:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          auto letters = power(1, i);
          auto b = power(2, j);
          letters.insert(letters.end(), b.begin(), b.end());
          mu.atoms.emplace_back(Word(letters), 1.0 / static_cast<double>(n * n));
        }
      break;
    case GroupKind::cyclic:
      if (group.order < 1) throw DomainError("cyclic group of order 0");
      for (std::size_t k = 0; k < group.order; ++k) {
        mu.atoms.emplace_back(Word(power(1, k)), 1.0 / static_cast<double>(group.order));
      }
      break;
    case GroupKind::free:
    case GroupKind::unknown:
      throw DomainError("no Følner family for group " + group.to_string());
  }
  return mu;
}

std::array<long long, 2> group_coordinates(const GroupModel& group, const Word& w) {
  if (group.kind == GroupKind::free || group.kind == GroupKind::unknown) {
    throw DomainError("group " + group.to_string() + " has no abelian coordinates");
  }
  std::array<long long, 2> c{0, 0};
  const std::size_t gens = group.kind == GroupKind::integers2 ? 2 : 1;
  for (int letter : w.letters()) {
    const auto g = static_cast<std::size_t>(std::abs(letter) - 1);
    if (group.kind == GroupKind::trivial) continue;
    if (g >= gens) throw DomainError("word uses a generator outside the group model");
    c[g] += letter > 0 ? 1 : -1;
  }
  switch (group.kind) {
    case GroupKind::trivial:
      return {0, 0};
    case GroupKind::cyclic: {
      const auto m = static_cast<long long>(group.order);
      c[0] = ((c[0] % m) + m) % m;
      return c;
    }
    case GroupKind::integers:
    case GroupKind::integers2:
      return c;
    default:
      return c;
  }
}

double shift_norm(const FolnerFamily& mu, const Word& gamma) {
  std::map<std::array<long long, 2>, double> base, shifted;
  for (const auto& [w, m] : mu.atoms) {
    auto c = group_coordinates(mu.group, w);
    base[c] += m;
    c = group_coordinates(mu.group, gamma * w);
    shifted[c] += m;
  }
  double s = 0.0;
  for (const auto& [c, m] : base) {
    auto it = shifted.find(c);
    s += std::abs(m - (it == shifted.end() ? 0.0 : it->second));
  }
  for (const auto& [c, m] : shifted) {
    if (!base.contains(c)) s += m;
  }
  return s;
}

// Convolution and statistics ------------------------------------------------------

ConvolutionResult convolve_witness(const FolnerFamily& mu, const WitnessMap& f, const WarpedGraph& g) {
  const std::size_t n = g.size();
  if (f.measures.size() != n) throw DomainError("witness does not cover the graph");
  if (mu.atoms.empty()) throw DomainError("empty Følner measure");
  ConvolutionResult res;
  std::vector<double> acc(n, 0.0);
  std::vector<NodeId> touched, targets;
  Dijkstra dj(g);
  double defect = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const Point& p = g.net().point(static_cast<NodeId>(x));
    targets.clear();
    for (const auto& [w, m] : mu.atoms) {
      const NodeId y = w.is_identity() ? static_cast<NodeId>(x) : snap(g.net(), apply(g.action(), w, p)).node;
      targets.push_back(y);
      for (const auto& [z, mz] : f.measures[y].atoms()) {
        if (acc[z] == 0.0) touched.push_back(z);
        acc[z] += m * mz;
      }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<std::pair<NodeId, double>> atoms;
    atoms.reserve(touched.size());
    for (NodeId z : touched) {
      atoms.emplace_back(z, acc[z]);
      acc[z] = 0.0;
    }
    touched.clear();
    res.witness.measures.emplace_back(std::move(atoms));

    dj.run_until(static_cast<NodeId>(x), targets);
    for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
      const double d = dj.distance(targets[i]);
      defect = std::max(defect, d - static_cast<double>(mu.atoms[i].first.length()));
    }
  }
  res.translation_defect = std::max(0.0, defect);
  res.witness.radius = f.radius + static_cast<double>(mu.max_length()) + res.translation_defect;
  return res;
}

double variation_statistic(const WitnessMap& f, const WarpedGraph& g, double s) {
  if (!(s > 0.0)) throw DomainError("variation scale must be > 0");
  if (f.measures.size() != g.size()) throw DomainError("witness does not cover the graph");
  Dijkstra dj(g);
  double best = 0.0;
  for (std::size_t u = 0; u < g.size(); ++u) {
    dj.run(static_cast<NodeId>(u), s + kSlack);
    for (NodeId v : dj.settled()) {
      if (v > u) best = std::max(best, total_variation(f.measures[u], f.measures[v]));
    }
  }
  return best;
}

double localization_radius(const WitnessMap& f, const WarpedGraph& g) {
  if (f.measures.size() != g.size()) throw DomainError("witness does not cover the graph");
  Dijkstra dj(g);
  std::vector<NodeId> support;
  double r = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    support.clear();
    for (const auto& a : f.measures[x].atoms()) support.push_back(a.first);
    dj.run_until(static_cast<NodeId>(x), support);
    for (NodeId z : support) r = std::max(r, dj.distance(z));
  }
  return r;
}

// Kernels -----------------------------------------------------------------------

KernelMatrix kernel_from_witness(const WitnessMap& f, const NodeSet& nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  KernelMatrix k{nodes, Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (nodes[static_cast<std::size_t>(i)] >= f.measures.size()) throw DomainError("node outside the witness");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = f.measures[nodes[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = sqrt_overlap(a, f.measures[nodes[static_cast<std::size_t>(j)]]);
      k.values(i, j) = v;
      k.values(j, i) = v;
    }
  }
  return k;
}

KernelFunction witness_kernel(const WitnessMap& f) {
  return [&f](NodeId x, NodeId y) { return sqrt_overlap(f.measures.at(x), f.measures.at(y)); };
}

KernelMatrix kernel_lift(const KernelMatrix& l, const Eigen::MatrixXd& weights, const NodeSet& nodes) {
  if (weights.cols() != static_cast<Eigen::Index>(l.size()) || l.values.rows() != weights.cols()) {
    throw DomainError("weight table has " + std::to_string(weights.cols()) + " columns for a kernel of size " +
                      std::to_string(l.size()));
  }
  if (!nodes.empty() && nodes.size() != static_cast<std::size_t>(weights.rows())) {
    throw DomainError("node labels do not match the weight rows");
  }
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    if (weights.row(i).minCoeff() < 0.0) throw DomainError("negative partition weight");
    if (std::abs(weights.row(i).sum() - 1.0) > 1e-9) throw DomainError("partition weights must sum to 1");
  }
  check_symmetric(l.values, 1e-9);
  KernelMatrix k;
  if (nodes.empty()) {
    k.nodes.resize(static_cast<std::size_t>(weights.rows()));
    for (std::size_t i = 0; i < k.nodes.size(); ++i) k.nodes[i] = static_cast<NodeId>(i);
  } else {
    k.nodes = nodes;
  }
  const Eigen::MatrixXd m = weights * l.values * weights.transpose();
  k.values = 0.5 * (m + m.transpose());
  return k;
}

PsdResult psd_check(const KernelMatrix& k, double tol) {
  check_symmetric(k.values, 1e-9);
  const auto n = static_cast<std::size_t>(k.values.rows());
  if (n == 0) return {0.0, true};
  double lmin;
  if (n <= 1024) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.values, Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues()(0);
  } else {
    const detail::Operator A = [&](const detail::Vec& x, detail::Vec& y) {
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
      Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
      yv.noalias() = k.values.selfadjointView<Eigen::Lower>() * xv;
    };
    detail::LanczosOptions lo;
    lo.basis = 300;
    lmin = detail::lanczos(A, n, detail::Extreme::smallest, {}, detail::cosine_start(n), lo).value;
  }
  return {lmin, lmin >= -tol};
}

double controlled_support_radius(const KernelMatrix& k, const WarpedGraph& g, double cutoff, double search_limit) {
  if (!(cutoff >= 0.0)) throw DomainError("cutoff must be >= 0");
  Dijkstra dj(g);
  double r = 0.0;
  std::vector<NodeId> targets;
  for (std::size_t i = 0; i < k.size(); ++i) {
    targets.clear();
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (std::abs(k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > cutoff) {
        targets.push_back(k.nodes[j]);
      }
    }
    if (targets.empty()) continue;
    dj.run_until(k.nodes[i], targets, search_limit);
    bool reached = true;
    for (NodeId v : targets) reached = reached && dj.distance(v) < kInfinity;
    if (!reached) dj.run_until(k.nodes[i], targets);
    for (NodeId v : targets) r = std::max(r, dj.distance(v));
  }
  return r;
}

LocalKernel window_kernel(const WarpedGraph& g, double w) {
  if (!(w >= 0.0)) throw DomainError("window width must be >= 0");
  const double radius = w / g.level() + kSlack;
  const Net* net = &g.net();
  KernelFunction value = [net, radius](NodeId x, NodeId y) {
    const Point& p = net->point(x);
    const Point& q = net->point(y);
    if (geodesic_unchecked(net->space(), p, q) > 2.0 * radius) return 0.0;
    thread_local std::vector<NodeId> a, b;
    net->within(p, radius, a);
    net->within(q, radius, b);
    std::size_t common = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
      if (a[i] < b[j]) {
        ++i;
      } else if (b[j] < a[i]) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
    return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  return {std::move(value), 2.0 * radius};
}

double GroupFunction::at(const Word& w) const {
  for (const auto& v : values)
    if (v.word == w) return v.value;
  throw DomainError("word " + w.to_string() + " was not evaluated");
}

GroupFunction haar_restrict(const KernelFunction& k, const WarpedGraph& g, const std::vector<Word>& words) {
  GroupFunction h;
  const std::size_t n = g.size();
  for (const Word& w : words) {
    double sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t x = 0; x < n; ++x) {
      const auto u = static_cast<NodeId>(x);
      const NodeId y = w.is_identity() ? u : snap(g.net(), apply(g.action(), w, g.net().point(u))).node;
      const double v = k(u, y);
      sum += v;
      if (v != 0.0) ++nonzero;
    }
    h.values.push_back({w, sum / static_cast<double>(n), nonzero});
  }
  return h;
}

GroupFunction haar_restrict(const KernelMatrix& k, const WarpedGraph& g, const std::vector<Word>& words) {
  if (k.size() != g.size()) throw DomainError("kernel does not cover the graph");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k.nodes[i] != i) throw DomainError("kernel nodes must be 0..n-1 in order");
  }
  return haar_restrict(
      [&k](NodeId x, NodeId y) { return k.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)); }, g,
      words);
}

GroupFunction haar_restrict(const LocalKernel& k, const WarpedGraph& g, const std::vector<Word>& words) {
  GroupFunction h;
  const std::size_t n = g.size();
  const SpaceSpec& space = g.net().space();
  // snap(gamma x) lies within the covering radius of gamma x; twice the mesh
  // keeps the skip conservative.
  const double reach = k.base_support + 2.0 * g.mesh();
  for (const Word& w : words) {
    double sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t x = 0; x < n; ++x) {
      const auto u = static_cast<NodeId>(x);
      const Point& p = g.net().point(u);
      NodeId y = u;
      if (!w.is_identity()) {
        const Point image = apply(g.action(), w, p);
        if (geodesic_unchecked(space, p, image) > reach) continue;
        y = snap(g.net(), image).node;
      }
      const double v = k.value(u, y);
      sum += v;
      if (v != 0.0) ++nonzero;
    }
    h.values.push_back({w, sum / static_cast<double>(n), nonzero});
  }
  return h;
}

NegativeTypeResult negative_type_check(const KernelMatrix& k, double tol) {
  check_symmetric(k.values, 1e-9);
  const Eigen::Index n = k.values.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(k.values(i, i)) > tol) throw DomainError("negative-type kernel needs a zero diagonal");
  }
  if (n < 2) return {0.0, true};
  // Orthonormal basis of the mean-zero subspace from a Householder QR of 1.
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd V = Q.rightCols(n - 1);
  const Eigen::MatrixXd B = V.transpose() * k.values * V;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues()(n - 2);
  return {lmax, lmax <= tol};
}

std::vector<ModulusBucket> compression_moduli(const KernelMatrix& k, const WarpedGraph& g, double width) {
  if (!(width > 0.0)) throw DomainError("bucket width must be > 0");
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (std::abs(d - 1.0) > 1e-9) throw DomainError("compression moduli need a unit diagonal");
  }
  std::map<long long, ModulusBucket> buckets;
  Dijkstra dj(g);
  for (std::size_t i = 0; i < k.size(); ++i) {
    dj.run(k.nodes[i]);
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      const double d = dj.distance(k.nodes[j]);
      const auto b = static_cast<long long>(std::floor(d / width));
      const double kv = k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double e = std::sqrt(std::max(0.0, 2.0 - 2.0 * kv));
      auto [it, fresh] = buckets.try_emplace(b, ModulusBucket{static_cast<double>(b) * width, 0, e, e});
      auto& m = it->second;
      ++m.pairs;
      m.min_embedded = std::min(m.min_embedded, e);
      m.max_embedded = std::max(m.max_embedded, e);
    }
  }
  std::vector<ModulusBucket> out;
  for (auto& [b, m] : buckets) out.push_back(m);
  return out;
}

void write_witness_csv(std::ostream& out, const WitnessMap& f) {
  out << "node,support_node,mass\n";
  for (std::size_t x = 0; x < f.measures.size(); ++x) {
    for (const auto& [z, m] : f.measures[x].atoms()) out << x << ',' << z << ',' << fmt_double(m) << '\n';
  }
}

void write_kernel_csv(std::ostream& out, const KernelMatrix& k) {
  out << "node";
  for (NodeId v : k.nodes) out << ',' << v;
  out << '\n';
  for (std::size_t i = 0; i < k.size(); ++i) {
    out << k.nodes[i];
    for (std::size_t j = 0; j < k.size(); ++j) {
      out << ',' << fmt_double(k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

void write_group_function_csv(std::ostream& out, const GroupFunction& h) {
  out << "word,value\n";
  for (const auto& v : h.values) out << v.word.to_string() << ',' << fmt_double(v.value) << '\n';
}

}  // namespace warpcone
