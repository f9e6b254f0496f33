#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "warpcone/errors.hpp"
#include "warpcone/propa.hpp"

using namespace warpcone;

namespace {

constexpr double kPi = std::numbers::pi;

WarpedGraph make_graph(const GroupAction& act, double mesh, double t, double factor = 3.0) {
  return WarpedGraph(std::make_shared<const Net>(make_net(act.space(), mesh)), act, t, factor * t * mesh);
}

KernelMatrix dense(Eigen::MatrixXd m) {
  KernelMatrix k;
  for (Eigen::Index i = 0; i < m.rows(); ++i) k.nodes.push_back(static_cast<NodeId>(i));
  k.values = std::move(m);
  return k;
}

NodeSet all_nodes(const WarpedGraph& g) {
  NodeSet s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<NodeId>(i);
  return s;
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd b(n + 2, n);
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < n; ++j) b(i, j) = z(rng);
  return b.transpose() * b;
}

Eigen::MatrixXd random_weights(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = u(rng) < 0.4 ? 0.0 : u(rng);
    w(i, rng() % cols) += 0.1;
    w.row(i) /= w.row(i).sum();
  }
  return w;
}

}  // namespace

TEST_SUITE("propa") {

TEST_CASE("sparse measures") {
  const SparseMeasure m({{3, 0.25}, {1, 0.5}, {3, 0.25}, {7, 0.0}});
  REQUIRE(m.atoms().size() == 2);
  CHECK(m.atoms()[0].first == 1);
  CHECK(m.mass_of(3) == doctest::Approx(0.5));
  CHECK(m.mass_of(7) == 0.0);
  CHECK(m.total() == doctest::Approx(1.0));
  CHECK_THROWS_AS(SparseMeasure({{0, 0.5}}), DomainError);
  CHECK_THROWS_AS(SparseMeasure({{0, 1.5}, {1, -0.5}}), DomainError);
  CHECK_THROWS_AS(SparseMeasure::uniform({}), DomainError);
  CHECK(total_variation(SparseMeasure::dirac(0), SparseMeasure::dirac(1)) == 2.0);
  CHECK(total_variation(SparseMeasure::uniform({0, 1}), SparseMeasure::uniform({1, 2})) == doctest::Approx(1.0));
  CHECK(total_variation(m, m) == 0.0);
}

TEST_CASE("Følner families on Z") {
  const auto Z = GroupModel::parse("Z");
  const auto d0 = folner_measures(Z, 1);
  REQUIRE(d0.atoms.size() == 1);
  CHECK(d0.atoms[0].first.is_identity());
  CHECK(shift_norm(d0, Word::parse("a")) == 2.0);
  const auto mu = folner_measures(Z, 10);
  CHECK(shift_norm(mu, Word::parse("a")) == doctest::Approx(0.2));
  CHECK(shift_norm(mu, Word::parse("aaa")) == doctest::Approx(0.6));
  CHECK(shift_norm(mu, Word::parse("AA")) == doctest::Approx(0.4));
  for (std::size_t n : {1u, 3u, 10u, 32u})
    for (int k = 0; k <= 40; ++k) {
      const double expect = 2.0 * std::min<double>(k, static_cast<double>(n)) / static_cast<double>(n);
      CHECK(shift_norm(folner_measures(Z, n), Word(std::vector<int>(k, 1))) == doctest::Approx(expect).epsilon(1e-12));
    }
  CHECK(mu.max_length() == 9);
}

TEST_CASE("Følner families on Z2, cyclic and trivial groups") {
  const auto box = folner_measures(GroupModel::parse("Z2"), 4);
  CHECK(box.atoms.size() == 16);
  CHECK(shift_norm(box, Word::parse("a")) == doctest::Approx(2.0 * 4 / 16));
  CHECK(shift_norm(box, Word::parse("ab")) == doctest::Approx(2.0 * 7 / 16));
  const auto c = folner_measures(GroupModel::parse("Z/5"), 3);
  CHECK(c.atoms.size() == 5);
  CHECK(shift_norm(c, Word::parse("aa")) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(folner_measures(GroupModel::parse("trivial"), 7).atoms.size() == 1);
  CHECK_THROWS_AS(folner_measures(GroupModel::parse("free"), 3), DomainError);
  CHECK_THROWS_AS(folner_measures(GroupModel::parse("Z"), 0), DomainError);
}

TEST_CASE("Følner shift norms decay in n") {
  const auto Z = GroupModel::parse("Z");
  double prev = 3.0;
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const double s = shift_norm(folner_measures(Z, n), Word::parse("a"));
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("witness constructors are localized probability fields") {
  const WarpedGraph g = make_graph(irrational_rotation(), 0.05, 4.0);
  for (const WitnessMap& f : {dirac_witness(g), window_witness(g, 0.7), ball_witness(g, 1.5)}) {
    Dijkstra dj(g);
    int bad = 0;
    for (NodeId x = 0; x < g.size(); ++x) {
      const auto& m = f.measures[x];
      if (std::abs(m.total() - 1.0) > 1e-9) ++bad;
      dj.run(x);
      for (const auto& [z, mass] : m.atoms())
        if (mass < 0 || dj.distance(z) > f.radius + 1e-9) ++bad;
    }
    CHECK(bad == 0);
  }
  CHECK(dirac_witness(g).radius == 0.0);
  CHECK(localization_radius(dirac_witness(g), g) == 0.0);
  CHECK(localization_radius(ball_witness(g, 1.5), g) <= 1.5 + 1e-12);
  const WitnessMap u = uniform_witness(g);
  CHECK(localization_radius(u, g) == doctest::Approx(diameter(g).value));
}

TEST_CASE("variation statistic examples") {
  const WarpedGraph g = make_graph(irrational_rotation(), 0.05, 4.0);
  CHECK(variation_statistic(uniform_witness(g), g, 2.0) == 0.0);
  CHECK(variation_statistic(dirac_witness(g), g, 2.0) == 2.0);
  CHECK_THROWS_AS(variation_statistic(dirac_witness(g), g, 0.0), DomainError);
}

TEST_CASE("window witness on the exact cyclic net") {
  // 64 nodes, trivial action, t = 1: a window of half-width m grid steps
  // holds 2m + 1 nodes and neighbours k steps apart differ by 2k / (2m + 1).
  const double h = 2 * kPi / 64;
  const WarpedGraph g = make_graph(trivial_action(SpaceSpec::circle()), h, 1.0);
  for (int m : {2, 3, 5}) {
    const WitnessMap f = window_witness(g, m * h + 1e-9);
    const int w = 2 * m + 1;
    for (NodeId x = 0; x < 64; ++x) CHECK(f.measures[x].atoms().size() == static_cast<std::size_t>(w));
    for (int k = 1; k < w; ++k)
      CHECK(total_variation(f.measures[5], f.measures[(5 + k) % 64]) == doctest::Approx(2.0 * k / w));
    for (int k = 1; k < w; ++k)
      CHECK(variation_statistic(f, g, k * h + 1e-9) == doctest::Approx(2.0 * k / w));
  }
}

TEST_CASE("convolution examples") {
  const WarpedGraph g = make_graph(irrational_rotation(), 0.05, 4.0);
  const WitnessMap f = window_witness(g, 0.5);
  const FolnerFamily delta = folner_measures(GroupModel::parse("trivial"), 1);
  const ConvolutionResult same = convolve_witness(delta, f, g);
  for (NodeId x = 0; x < g.size(); ++x) CHECK(total_variation(same.witness.measures[x], f.measures[x]) == 0.0);
  CHECK(same.translation_defect == 0.0);

  FolnerFamily two{GroupModel::parse("Z"), 2, {{Word(), 0.5}, {Word::parse("a"), 0.5}}};
  const ConvolutionResult c = convolve_witness(two, dirac_witness(g), g);
  for (NodeId x = 0; x < g.size(); ++x) {
    const NodeId sx = g.wormhole_target(x, 0);
    CHECK(c.witness.measures[x].mass_of(x) == doctest::Approx(sx == x ? 1.0 : 0.5));
    CHECK(c.witness.measures[x].mass_of(sx) == doctest::Approx(sx == x ? 1.0 : 0.5));
  }
  CHECK(c.witness.radius == doctest::Approx(1.0 + c.translation_defect));
}

TEST_CASE("convolution localization bound and variation improvement") {
  for (double t : {4.0, 8.0}) {
    const WarpedGraph g = make_graph(irrational_rotation(), 0.1 / t, t);
    const WitnessMap dirac = dirac_witness(g);
    const FolnerFamily mu = folner_measures(GroupModel::parse("Z"), 16);
    const ConvolutionResult c = convolve_witness(mu, dirac, g);
    // Independent defect: Dijkstra distances to snapped translates.
    double defect = 0;
    for (NodeId x = 0; x < g.size(); ++x) {
      const auto d = distances_from(g, x);
      for (const auto& [w, m] : mu.atoms) {
        const NodeId y = oracle::nearest(g.net(), apply(g.action(), w, g.net().point(x)));
        defect = std::max(defect, d[y] - static_cast<double>(w.length()));
      }
      CHECK(std::abs(c.witness.measures[x].total() - 1.0) <= 1e-9);
    }
    CHECK(c.translation_defect == doctest::Approx(std::max(0.0, defect)).epsilon(1e-12));
    const double loc = localization_radius(c.witness, g);
    CHECK(loc <= c.witness.radius + 1e-12);
    CHECK(c.witness.radius == doctest::Approx(dirac.radius + 15 + c.translation_defect));
    CHECK(variation_statistic(c.witness, g, 2.0) <= variation_statistic(dirac, g, 2.0));
  }
}

TEST_CASE("kernel_from_witness") {
  const WarpedGraph g = make_graph(irrational_rotation(), 2 * kPi / 64, 4.0);
  REQUIRE(g.size() == 64);
  const NodeSet nodes = all_nodes(g);
  const KernelMatrix id = kernel_from_witness(dirac_witness(g), nodes);
  CHECK(id.values.isApprox(Eigen::MatrixXd::Identity(64, 64)));
  const KernelMatrix ones = kernel_from_witness(uniform_witness(g), nodes);
  CHECK((ones.values.array() - 1.0).abs().maxCoeff() <= 1e-12);

  const WitnessMap f = convolve_witness(folner_measures(GroupModel::parse("Z"), 8), window_witness(g, 1.0), g).witness;
  const KernelMatrix k = kernel_from_witness(f, nodes);
  const PsdResult psd = psd_check(k);
  CHECK(psd.positive_type);
  CHECK(psd.min_eigenvalue >= -1e-8);
  CHECK((k.values.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(k.values.minCoeff() >= 0.0);
  CHECK(k.values.maxCoeff() <= 1.0 + 1e-12);
  CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(controlled_support_radius(k, g) <= 2 * localization_radius(f, g) + 1e-9);
  // Function form agrees with the matrix.
  const KernelFunction kf = witness_kernel(f);
  for (NodeId i = 0; i < 64; i += 5)
    for (NodeId j = 0; j < 64; j += 3) CHECK(kf(i, j) == doctest::Approx(k.values(i, j)).epsilon(1e-14));
}

TEST_CASE("psd_check examples") {
  CHECK(psd_check(dense(Eigen::MatrixXd::Ones(4, 4))).positive_type);
  CHECK(psd_check(dense(Eigen::MatrixXd::Ones(4, 4))).min_eigenvalue == doctest::Approx(0.0));
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  const PsdResult r = psd_check(dense(m));
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));
  CHECK_FALSE(r.positive_type);
  std::mt19937_64 rng(4);
  CHECK(psd_check(dense(random_psd(rng, 30))).positive_type);
  m(0, 1) = 2.1;
  CHECK_THROWS_AS(psd_check(dense(m)), DomainError);
}

TEST_CASE("psd_check above the dense limit uses Lanczos") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0, 1);
  const int n = 1100;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = z(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  for (double low : {-0.3, 0.2}) {
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = low + 5.0 * i / n;
    const Eigen::MatrixXd m = q * lam.asDiagonal() * q.transpose();
    const PsdResult r = psd_check(dense(0.5 * (m + m.transpose())));
    CHECK(r.min_eigenvalue == doctest::Approx(low).epsilon(1e-6));
    CHECK(r.positive_type == (low > 0));
  }
}

TEST_CASE("kernel_lift") {
  std::mt19937_64 rng(8);
  const KernelMatrix l1 = dense(Eigen::MatrixXd::Ones(5, 5));
  const KernelMatrix lifted = kernel_lift(l1, random_weights(rng, 9, 5));
  CHECK((lifted.values.array() - 1.0).abs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd hard = Eigen::MatrixXd::Zero(6, 3);
  for (int i = 0; i < 6; ++i) hard(i, i / 2) = 1.0;
  const KernelMatrix block = kernel_lift(dense(Eigen::MatrixXd::Identity(3, 3)), hard);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(block.values(i, j) == (i / 2 == j / 2 ? 1.0 : 0.0));

  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 12), rows = 2 + static_cast<int>(rng() % 20);
    const KernelMatrix l = dense(random_psd(rng, n));
    const KernelMatrix k = kernel_lift(l, random_weights(rng, rows, n));
    if (!psd_check(k).positive_type) ++failures;
    if (k.values.cwiseAbs().maxCoeff() > l.values.cwiseAbs().maxCoeff() + 1e-12) ++failures;
  }
  CHECK(failures == 0);

  CHECK_THROWS_AS(kernel_lift(l1, Eigen::MatrixXd::Ones(3, 4) / 4), DomainError);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Constant(2, 5, 0.2);
  neg(0, 0) = -0.2;
  neg(0, 1) = 0.6;
  CHECK_THROWS_AS(kernel_lift(l1, neg), DomainError);
  CHECK_THROWS_AS(kernel_lift(l1, Eigen::MatrixXd::Constant(2, 5, 0.3)), DomainError);
  CHECK_THROWS_AS(kernel_lift(l1, Eigen::MatrixXd::Constant(2, 5, 0.2), NodeSet{1, 2, 3}), DomainError);
}

TEST_CASE("controlled support radius examples") {
  const WarpedGraph g = make_graph(irrational_rotation(), 0.05, 4.0);
  const NodeSet nodes = all_nodes(g);
  const KernelMatrix id = kernel_from_witness(dirac_witness(g), nodes);
  CHECK(controlled_support_radius(id, g) == 0.0);
  const KernelMatrix ones = kernel_from_witness(uniform_witness(g), nodes);
  CHECK(controlled_support_radius(ones, g) == doctest::Approx(diameter(g).value));
  CHECK(controlled_support_radius(ones, g, 1e-9, 1.0) == doctest::Approx(diameter(g).value));
  const WitnessMap f = window_witness(g, 0.6);
  const KernelMatrix k = kernel_from_witness(f, nodes);
  const double r = controlled_support_radius(k, g);
  // Brute force over all pairs.
  const DistanceMatrix d = all_pairs_oracle(g);
  double brute = 0;
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = 0; j < g.size(); ++j)
      if (std::abs(k.values(i, j)) > 1e-9) brute = std::max(brute, d(i, j));
  CHECK(r == doctest::Approx(brute));
  CHECK(r <= 2 * f.radius + 1e-9);
}

TEST_CASE("window kernel matches the witness kernel") {
  const WarpedGraph g = make_graph(free_so3(), 0.1, 3.0);
  const double w = 0.6;
  const LocalKernel lk = window_kernel(g, w);
  const KernelMatrix k = kernel_from_witness(window_witness(g, w), all_nodes(g));
  std::mt19937_64 rng(10);
  for (int s = 0; s < 3000; ++s) {
    const auto x = static_cast<NodeId>(rng() % g.size());
    const auto y = s % 2 ? static_cast<NodeId>(rng() % g.size()) : g.wormhole_target(x, rng() % 4);
    CHECK(lk.value(x, y) == doctest::Approx(k.values(x, y)).epsilon(1e-12));
  }
  for (NodeId x = 0; x < g.size(); ++x)
    for (NodeId y = 0; y < g.size(); y += 7)
      if (k.values(x, y) != 0.0) CHECK(geodesic(g.net().space(), g.net().point(x), g.net().point(y)) <= lk.base_support);
}

TEST_CASE("haar_restrict") {
  const WarpedGraph g = make_graph(free_so3(), 0.15, 3.0);
  const auto words = enumerate_ball(g.action(), 2);
  const NodeSet nodes = all_nodes(g);
  const GroupFunction ones = haar_restrict(kernel_from_witness(uniform_witness(g), nodes), g, words);
  for (const auto& v : ones.values) CHECK(v.value == doctest::Approx(1.0));
  const WitnessMap f = window_witness(g, 0.6);
  const KernelMatrix k = kernel_from_witness(f, nodes);
  const GroupFunction h = haar_restrict(k, g, words);
  CHECK(h.at(Word()) == doctest::Approx(1.0));
  CHECK(h.values.front().nonzero_nodes == g.size());
  CHECK_THROWS_AS(h.at(Word::parse("aaa")), DomainError);
  // Direct mean with brute-force snapping.
  for (const auto& v : h.values) {
    double sum = 0;
    for (NodeId x = 0; x < g.size(); ++x) sum += k.values(x, oracle::nearest(g.net(), apply(g.action(), v.word, g.net().point(x))));
    CHECK(v.value == doctest::Approx(sum / g.size()).epsilon(1e-12));
  }
  const GroupFunction fast = haar_restrict(window_kernel(g, 0.6), g, words);
  const GroupFunction slow = haar_restrict(witness_kernel(f), g, words);
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(fast.values[i].value == doctest::Approx(h.values[i].value).epsilon(1e-12));
    CHECK(slow.values[i].value == doctest::Approx(h.values[i].value).epsilon(1e-12));
    CHECK(fast.values[i].nonzero_nodes == h.values[i].nonzero_nodes);
  }
  KernelMatrix partial = k;
  partial.nodes.pop_back();
  partial.values.conservativeResize(g.size() - 1, g.size() - 1);
  CHECK_THROWS_AS(haar_restrict(partial, g, words), DomainError);
}

TEST_CASE("negative type examples") {
  CHECK(negative_type_check(dense(Eigen::MatrixXd::Zero(5, 5))).negative_type);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  Eigen::MatrixXd sq(8, 8);
  std::vector<double> xs(8);
  for (double& x : xs) x = u(rng);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) sq(i, j) = (xs[i] - xs[j]) * (xs[i] - xs[j]);
  CHECK(negative_type_check(dense(sq)).negative_type);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 3);
  bad(1, 1) = 0.1;
  CHECK_THROWS_AS(negative_type_check(dense(bad)), DomainError);
}

TEST_CASE("negative type verdict matches random mean-zero sampling") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z(0, 1);
  int disagreements = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 5;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m(i, j) = m(j, i) = std::abs(z(rng));
    const NegativeTypeResult r = negative_type_check(dense(m));
    double best = -oracle::kInf;
    for (int s = 0; s < 10000; ++s) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = z(rng);
      v.array() -= v.mean();
      v.normalize();
      best = std::max(best, v.dot(m * v));
    }
    disagreements += r.negative_type != (best <= 1e-9);
    CHECK(best <= r.max_eigenvalue + 1e-9);
  }
  CHECK(disagreements == 0);
}

TEST_CASE("compression moduli") {
  const double t = 2.0, mesh = 2 * kPi / 48;
  const WarpedGraph g = make_graph(trivial_action(SpaceSpec::circle()), mesh, t);
  const NodeSet nodes = all_nodes(g);
  const auto ones = compression_moduli(kernel_from_witness(uniform_witness(g), nodes), g);
  for (const auto& b : ones) CHECK(b.max_embedded == doctest::Approx(0.0));
  const auto id = compression_moduli(kernel_from_witness(dirac_witness(g), nodes), g);
  for (const auto& b : id) {
    CHECK(b.min_embedded == doctest::Approx(std::sqrt(2.0)));
    CHECK(b.max_embedded == doctest::Approx(std::sqrt(2.0)));
  }

  // Spectral embedding: the first nontrivial eigenpair of the dense
  // normalized Laplacian of the unit-radius graph, projected on the circle.
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  const Eigen::VectorXd deg = a.rowwise().sum();
  const Eigen::VectorXd s = deg.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n) - s.asDiagonal() * a * s.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  Eigen::MatrixXd phi = es.eigenvectors().middleCols(1, 2);
  for (Eigen::Index i = 0; i < n; ++i) phi.row(i).normalize();
  const KernelMatrix k = dense(phi * phi.transpose());
  CHECK(psd_check(k).positive_type);
  const auto buckets = compression_moduli(k, g, 1.0);
  REQUIRE(buckets.size() >= 6);
  for (std::size_t i = 1; i < 5; ++i) CHECK(buckets[i].min_embedded > buckets[i - 1].min_embedded);
  CHECK_THROWS_AS(compression_moduli(dense(2 * Eigen::MatrixXd::Identity(3, 3)), g), DomainError);
}

TEST_CASE("csv dumps") {
  const WarpedGraph g = make_graph(irrational_rotation(), 2 * kPi / 8, 2.0);
  std::ostringstream w, k, h;
  write_witness_csv(w, dirac_witness(g));
  CHECK(w.str().rfind("node,support_node,mass\n0,0,1\n", 0) == 0);
  write_kernel_csv(k, kernel_from_witness(dirac_witness(g), NodeSet{0, 3}));
  CHECK(k.str() == "node,0,3\n0,1,0\n3,0,1\n");
  write_group_function_csv(h, GroupFunction{{{Word(), 1.0, 8}, {Word::parse("a"), 0.25, 2}}});
  CHECK(h.str() == "word,value\ne,1\na,0.25\n");
}

}  // TEST_SUITE
