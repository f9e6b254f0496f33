#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "warpcone/errors.hpp"
#include "warpcone/warpgraph.hpp"

using namespace warpcone;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Net> net_of(const SpaceSpec& s, double mesh) {
  return std::make_shared<const Net>(make_net(s, mesh));
}

WarpedGraph cyclic8(double t) {
  const auto act = circle_rotation(1.0 / 8, GroupModel{GroupKind::cyclic, 8});
  const double mesh = 2 * kPi / 8;
  return WarpedGraph(net_of(SpaceSpec::circle(), mesh), act, t, 3 * t * mesh);
}

NodeSet iterate_nk(const WarpedGraph& g, NodeId p, double k, int times) {
  NodeSet s{p};
  for (int i = 0; i < times; ++i) s = nk_neighborhood(g, s, k);
  return s;
}

}  // namespace

TEST_SUITE("warpgraph") {

TEST_CASE("cyclic 8-net examples") {
  const WarpedGraph g = cyclic8(8);
  CHECK(g.size() == 8);
  CHECK(g.max_snap_error() == 0.0);
  CHECK(g.wormhole_edge_count() == 8);
  CHECK(warped_distance(g, 3, 3) == 0.0);
  CHECK(warped_distance(g, 0, 1) == doctest::Approx(1.0));
  CHECK(warped_distance(g, 0, 4) == doctest::Approx(4.0));
  CHECK(warped_distance(g, 2, 7) == doctest::Approx(3.0));
  const auto oracle_d = oracle::floyd_warshall(oracle::level_weights(g.net(), g.action(), 8, g.radius()));
  for (NodeId u = 0; u < 8; ++u)
    for (NodeId v = 0; v < 8; ++v) CHECK(warped_distance(g, u, v) == doctest::Approx(oracle_d(u, v)).epsilon(1e-12));
}

TEST_CASE("trivial group has no wormholes and the scaled base metric") {
  const auto act = trivial_action(SpaceSpec::circle());
  const double mesh = 2 * kPi / 8;
  const WarpedGraph g(net_of(SpaceSpec::circle(), mesh), act, 1.0, 3 * mesh);
  CHECK(g.wormhole_edge_count() == 0);
  CHECK(g.move_count() == 0);
  CHECK(warped_distance(g, 0, 1) == doctest::Approx(2 * kPi / 8));
  CHECK(warped_distance(g, 0, 4) == doctest::Approx(kPi));
  const auto metric = distances_from(g, 0, EdgeFilter::metric_only);
  const auto all = distances_from(g, 0);
  CHECK(metric == all);
}

TEST_CASE("irrational rotation snaps within half the grid spacing") {
  const auto act = irrational_rotation();
  const auto net = net_of(SpaceSpec::circle(), 2 * kPi / 64);
  REQUIRE(net->size() == 64);
  const WarpedGraph g(net, act, 4.0, 3 * 4.0 * net->mesh());
  CHECK(g.max_snap_error() <= net->mesh() / 2 + 1e-12);
  double worst = 0;
  for (NodeId u = 0; u < g.size(); ++u) {
    for (std::size_t m = 0; m < g.move_count(); ++m) {
      const Point img = apply(act, Word(std::vector<int>{act.moves()[m].letter()}), net->point(u));
      CHECK(g.wormhole_target(u, m) == oracle::nearest(*net, img));
      worst = std::max(worst, oracle::distance(net->space(), img, net->point(g.wormhole_target(u, m))));
    }
  }
  CHECK(g.max_snap_error() == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("edge invariants on random graphs") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 12; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    CAPTURE(sg.label);
    std::set<std::pair<NodeId, NodeId>> worm;
    int bad = 0;
    for (const Edge& e : g.edges()) {
      if (!(e.u < e.v)) ++bad;
      if (e.kind == EdgeKind::metric) {
        const double w = g.level() * oracle::distance(g.net().space(), g.net().point(e.u), g.net().point(e.v));
        if (std::abs(e.weight - w) > 1e-9 || e.weight > g.radius() * (1 + 1e-12)) ++bad;
      } else {
        if (e.weight != 1.0) ++bad;
        worm.insert({e.u, e.v});
      }
    }
    CHECK(bad == 0);
    // Every forward wormhole appears as an undirected edge.
    for (NodeId u = 0; u < g.size(); ++u)
      for (std::size_t m = 0; m < g.move_count(); ++m) {
        const NodeId v = g.wormhole_target(u, m);
        if (v != u) CHECK(worm.count({std::min(u, v), std::max(u, v)}) == 1);
      }
    CHECK(worm.size() == g.wormhole_edge_count());
  }
}

TEST_CASE("Dijkstra equals both Floyd-Warshall oracles") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 12; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    CAPTURE(sg.label);
    REQUIRE(g.size() <= 200);
    const auto fw = oracle::floyd_warshall(oracle::level_weights(g.net(), g.action(), g.level(), g.radius()));
    const DistanceMatrix lib = all_pairs_oracle(g);
    double worst = 0;
    for (NodeId u = 0; u < g.size(); ++u) {
      const auto d = distances_from(g, u);
      for (NodeId v = 0; v < g.size(); ++v) {
        worst = std::max(worst, std::abs(d[v] - fw(u, v)));
        worst = std::max(worst, std::abs(lib(u, v) - fw(u, v)));
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("all_pairs_oracle basics") {
  const WarpedGraph two(net_of(SpaceSpec::finite_set(2), 0.1), trivial_action(SpaceSpec::finite_set(2)), 1.0, 1.0);
  const DistanceMatrix d = all_pairs_oracle(two);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == 1.0);
  CHECK(d(1, 0) == 1.0);
  const WarpedGraph big(net_of(SpaceSpec::circle(), 0.01), irrational_rotation(), 1.0, 0.03);
  CHECK_THROWS_AS(all_pairs_oracle(big), ResourceError);
}

TEST_CASE("defining inequalities") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 12; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    CAPTURE(sg.label);
    int bad = 0;
    for (NodeId u = 0; u < g.size(); ++u) {
      const auto d = distances_from(g, u);
      const auto metric = distances_from(g, u, EdgeFilter::metric_only);
      for (NodeId v = 0; v < g.size(); ++v) {
        if (d[v] > metric[v] + 1e-9) ++bad;
        if ((d[v] == 0.0) != (u == v)) ++bad;
      }
      for (std::size_t m = 0; m < g.move_count(); ++m)
        if (d[g.wormhole_target(u, m)] > 1.0 + 1e-9) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("symmetry and triangle inequality") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 6; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    const DistanceMatrix d = all_pairs_oracle(g);
    int bad = 0;
    for (int s = 0; s < 2000; ++s) {
      const auto x = static_cast<NodeId>(rng() % g.size()), y = static_cast<NodeId>(rng() % g.size()),
                 z = static_cast<NodeId>(rng() % g.size());
      if (std::abs(warped_distance(g, x, y) - warped_distance(g, y, x)) > 1e-9) ++bad;
      if (d(x, z) > d(x, y) + d(y, z) + 1e-9) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("adding a generator never increases distances") {
  const auto net = net_of(SpaceSpec::circle(), 0.05);
  const double t = 10;
  const GroupAction one(SpaceSpec::circle(), {Generator{"a", CircleRotation{2 * kPi * (std::sqrt(2.0) - 1)}}},
                        GroupModel::parse("Z"));
  const GroupAction two(SpaceSpec::circle(),
                        {Generator{"a", CircleRotation{2 * kPi * (std::sqrt(2.0) - 1)}},
                         Generator{"b", CircleRotation{2 * kPi * (std::sqrt(3.0) - 1)}}},
                        GroupModel::parse("unknown"));
  const WarpedGraph g1(net, one, t, 3 * t * net->mesh()), g2(net, two, t, 3 * t * net->mesh());
  int bad = 0;
  for (NodeId u = 0; u < g1.size(); u += 7) {
    const auto a = distances_from(g1, u), b = distances_from(g2, u);
    for (NodeId v = 0; v < g1.size(); ++v) bad += b[v] > a[v] + 1e-9;
  }
  CHECK(bad == 0);
}

TEST_CASE("raising t on a fixed net never decreases distances") {
  for (const auto& act : {free_so3(), cat_map(), irrational_rotation()}) {
    const double mesh = act.space().kind == SpaceKind::sphere2 ? 0.25 : 0.1;
    const auto net = net_of(act.space(), mesh);
    std::vector<std::vector<double>> prev;
    for (double t : {1.0, 2.0, 5.0, 13.0, 40.0}) {
      const WarpedGraph g(net, act, t, 3 * t * mesh);
      std::vector<std::vector<double>> cur;
      for (NodeId u = 0; u < g.size(); u += 5) cur.push_back(distances_from(g, u));
      if (!prev.empty()) {
        int bad = 0;
        for (std::size_t i = 0; i < cur.size(); ++i)
          for (std::size_t v = 0; v < cur[i].size(); ++v) bad += cur[i][v] < prev[i][v] - 1e-9;
        CHECK(bad == 0);
      }
      prev = std::move(cur);
    }
  }
}

TEST_CASE("chain economy on shortest paths") {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 12; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    Dijkstra dj(g);
    int bad = 0;
    for (NodeId u = 0; u < g.size(); u += 3) {
      dj.run(u);
      for (NodeId v = 0; v < g.size(); ++v) {
        const auto kinds = dj.path_kinds(v);
        const auto worms = std::count(kinds.begin(), kinds.end(), EdgeKind::wormhole);
        if (static_cast<double>(worms) > std::floor(dj.distance(v) + 1e-9)) ++bad;
        // The recorded path realises the distance.
        const auto nodes = dj.path_nodes(v);
        double len = 0;
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
          len += kinds[k] == EdgeKind::wormhole
                     ? 1.0
                     : g.level() * oracle::distance(g.net().space(), g.net().point(nodes[k]), g.net().point(nodes[k + 1]));
        if (std::abs(len - dj.distance(v)) > 1e-9 || nodes.front() != u || nodes.back() != v) ++bad;
      }
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("word length stabilizes on the exact cyclic scenario") {
  const WarpedGraph g = cyclic8(64);
  const auto& act = g.action();
  for (const Word& w : enumerate_ball(act, 4)) {
    for (NodeId x = 0; x < 8; ++x) {
      const NodeId y = snap(g.net(), apply(act, w, g.net().point(x))).node;
      CHECK(warped_distance(g, x, y) == doctest::Approx(static_cast<double>(w.length())).epsilon(1e-12));
    }
  }
}

TEST_CASE("lazy metric adjacency matches the explicit one") {
  const auto net = net_of(SpaceSpec::sphere2(), 0.1);
  GraphOptions lazy;
  lazy.force_lazy = true;
  const WarpedGraph a(net, free_so3(), 6.0, 1.8), b(net, free_so3(), 6.0, 1.8, lazy);
  CHECK(a.explicit_metric());
  CHECK_FALSE(b.explicit_metric());
  for (NodeId u : {0u, 17u, 400u, 1200u}) CHECK(distances_from(a, u) == distances_from(b, u));
  CHECK(a.edges().size() == b.edges().size());
}

TEST_CASE("construction errors") {
  const auto net5 = net_of(SpaceSpec::finite_set(5), 0.1);
  CHECK_THROWS_AS(WarpedGraph(net5, trivial_action(SpaceSpec::finite_set(5)), 10.0, 3.0), ConstructionError);
  try {
    WarpedGraph(net5, trivial_action(SpaceSpec::finite_set(5)), 10.0, 3.0);
  } catch (const ConstructionError& e) {
    CHECK(std::string(e.what()).find("5 components") != std::string::npos);
  }
  const auto circ = net_of(SpaceSpec::circle(), 0.1);
  CHECK_THROWS_AS(WarpedGraph(circ, irrational_rotation(), 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(WarpedGraph(circ, irrational_rotation(), 2.0, 0.3), DomainError);
  CHECK_THROWS_AS(WarpedGraph(circ, free_so3(), 2.0, 1.0), DomainError);
  GraphOptions unchecked;
  unchecked.check_connected = false;
  const WarpedGraph loose(net5, trivial_action(SpaceSpec::finite_set(5)), 10.0, 3.0, unchecked);
  CHECK(warped_distance(loose, 0, 1) == kInfinity);
  CHECK_FALSE(diameter(loose).value < kInfinity);
}

TEST_CASE("diameter: transitive finite set is constant") {
  for (double t : {1.0, 10.0, 100.0}) {
    const WarpedGraph g(net_of(SpaceSpec::finite_set(5), 0.1 / t), cyclic_shift(5), t, 0.3);
    const DiameterResult d = diameter(g);
    CHECK(d.exact);
    CHECK(d.value == doctest::Approx(2.0));
    const auto fw = oracle::floyd_warshall(oracle::level_weights(g.net(), g.action(), t, g.radius()));
    CHECK(fw.maxCoeff() == doctest::Approx(2.0));
  }
}

TEST_CASE("diameter: trivial circle is pi t") {
  for (double t : {4.0, 16.0}) {
    const double mesh = 0.1 / t;
    const WarpedGraph g(net_of(SpaceSpec::circle(), mesh), trivial_action(SpaceSpec::circle()), t, 3 * t * mesh);
    const DiameterResult d = diameter(g);
    CHECK(d.exact);
    CHECK(std::abs(d.value - kPi * t) <= t * mesh);
    CHECK(warped_distance(g, d.from, d.to) == doctest::Approx(d.value));
  }
}

TEST_CASE("double sweep is a lower bound on the exact diameter") {
  std::mt19937_64 rng(26);
  for (int i = 0; i < 6; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const DiameterResult exact = diameter(sg.graph), sweep = diameter(sg.graph, 0);
    CHECK(exact.exact);
    CHECK_FALSE(sweep.exact);
    CHECK(sweep.value <= exact.value + 1e-12);
    const DistanceMatrix m = all_pairs_oracle(sg.graph);
    CHECK(exact.value == doctest::Approx(*std::max_element(m.d.begin(), m.d.end())));
  }
}

TEST_CASE("warped_ball") {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 6; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    const auto c = static_cast<NodeId>(rng() % g.size());
    const double r = 0.5 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto ball = warped_ball(g, c, r);
    const auto d = distances_from(g, c);
    std::vector<NodeId> expect;
    for (NodeId v = 0; v < g.size(); ++v)
      if (d[v] <= r + 1e-12) expect.push_back(v);
    std::vector<NodeId> got;
    for (const auto& e : ball) got.push_back(e.node);
    std::sort(got.begin(), got.end());
    CHECK(got == expect);
    CHECK(ball.front().node == c);
    for (std::size_t k = 1; k < ball.size(); ++k)
      CHECK((ball[k - 1].distance < ball[k].distance ||
             (ball[k - 1].distance == ball[k].distance && ball[k - 1].node < ball[k].node)));
  }
}

TEST_CASE("nk_neighborhood examples") {
  const auto net = net_of(SpaceSpec::circle(), 0.05);
  const double t = 5;
  const WarpedGraph triv(net, trivial_action(SpaceSpec::circle()), t, 3 * t * net->mesh());
  const NodeSet K{3, 40};
  std::vector<NodeId> expect;
  for (NodeId x = 0; x < net->size(); ++x) {
    for (NodeId y : K)
      if (t * oracle::distance(net->space(), net->point(x), net->point(y)) <= 1.5 + 1e-12) {
        expect.push_back(x);
        break;
      }
  }
  CHECK(nk_neighborhood(triv, K, 1.5) == expect);

  const WarpedGraph g(net, irrational_rotation(), t, 3 * t * net->mesh());
  std::set<NodeId> zero{17};
  for (const Move& m : g.action().moves()) zero.insert(snap(*net, apply(g.action(), Word({m.letter()}), net->point(17))).node);
  const NodeSet k0 = nk_neighborhood(g, NodeSet{17}, 0.0);
  // Forward translates are always present; reverse wormhole ends may add more.
  for (NodeId z : zero) CHECK(std::binary_search(k0.begin(), k0.end(), z));
  CHECK_THROWS_AS(nk_neighborhood(g, NodeSet{17}, -1.0), DomainError);
}

TEST_CASE("warped balls lie in iterated N_k") {
  std::mt19937_64 rng(28);
  for (int i = 0; i < 6; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    CAPTURE(sg.label);
    for (int c = 0; c < 4; ++c) {
      const auto p = static_cast<NodeId>(rng() % g.size());
      for (int k = 0; k <= 4; ++k) {
        const NodeSet cover = iterate_nk(g, p, k, k + 1);
        int missing = 0;
        for (const auto& e : warped_ball(g, p, k)) missing += !std::binary_search(cover.begin(), cover.end(), e.node);
        CHECK(missing == 0);
      }
    }
  }
}

TEST_CASE("epsilon capacity") {
  const WarpedGraph g1 = cyclic8(1);
  const CapacityResult all = epsilon_capacity(g1, 0, kPi, 0.5);
  const auto d = oracle::floyd_warshall(oracle::level_weights(g1.net(), g1.action(), 1, g1.radius()));
  std::vector<NodeId> ball;
  for (NodeId v = 0; v < 8; ++v)
    if (d(0, v) <= kPi + 1e-12) ball.push_back(v);
  CHECK(all.count == oracle::max_separated(ball, d, 0.5));
  CHECK(all.count == 8);
  CHECK(epsilon_capacity(g1, 0, 0.1, 0.05).count == 1);
  CHECK_THROWS_AS(epsilon_capacity(g1, 0, 0.0, 1.0), DomainError);

  std::mt19937_64 rng(29);
  for (int i = 0; i < 12; ++i) {
    const auto sg = gen::random_small_graph(rng, i);
    const WarpedGraph& g = sg.graph;
    const auto fw = oracle::floyd_warshall(oracle::level_weights(g.net(), g.action(), g.level(), g.radius()));
    const auto c = static_cast<NodeId>(rng() % g.size());
    const double r = 1.0 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng), eps = 1.0;
    const CapacityResult res = epsilon_capacity(g, c, r, eps);
    std::vector<NodeId> in_ball;
    for (NodeId v = 0; v < g.size(); ++v)
      if (fw(c, v) <= r + 1e-12) in_ball.push_back(v);
    // Separated, maximal, and no larger than the true maximum.
    for (std::size_t a = 0; a < res.chosen.size(); ++a)
      for (std::size_t b = a + 1; b < res.chosen.size(); ++b) CHECK(fw(res.chosen[a], res.chosen[b]) >= eps - 1e-9);
    for (NodeId v : in_ball) {
      bool near = false;
      for (NodeId x : res.chosen) near = near || fw(v, x) < eps + 1e-9;
      CHECK(near);
    }
    if (in_ball.size() <= 22) CHECK(res.count <= oracle::max_separated(in_ball, fw, eps - 1e-9));
  }
}

TEST_CASE("graph csv") {
  std::ostringstream out;
  write_graph_csv(out, cyclic8(8));
  const std::string s = out.str();
  CHECK(s.rfind("u,v,weight,kind\n", 0) == 0);
  CHECK(s.find(",1,wormhole") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + static_cast<long>(cyclic8(8).edges().size()));
}

}  // TEST_SUITE
