#include <doctest.h>

#include <cmath>

#include "mfperc/error.hpp"
#include "mfperc/graph.hpp"
#include "mfperc/nbrw.hpp"
#include "oracles.hpp"

using namespace mfperc;

namespace {

std::vector<Graph> zoo() {
  return {complete_graph(4),         petersen_graph(),      hamming_graph(2, 3), hamming_graph(3, 3),
          cycle_graph(6),            complete_graph(7),     random_regular_graph(12, 3, 5),
          random_regular_graph(14, 4, 8)};
}

}  // namespace

TEST_CASE("directed edge space") {
  const auto k4 = complete_graph(4);
  DirectedEdgeSpace s(k4);
  CHECK(s.size() == 12);
  for (DirEdge e = 0; e < s.size(); ++e) {
    CHECK(s.reverse(s.reverse(e)) == e);
    CHECK(s.successors(e).size() == 2);
    CHECK(s.tail(s.reverse(e)) == s.head(e));
    for (DirEdge f : s.successors(e)) {
      CHECK(s.tail(f) == s.head(e));
      CHECK(s.head(f) != s.tail(e));
    }
  }
  const auto c6 = cycle_graph(6);
  DirectedEdgeSpace sc(c6);
  CHECK(sc.size() == 12);
  for (DirEdge e = 0; e < sc.size(); ++e) CHECK(sc.successors(e).size() == 1);
  const auto h = hamming_graph(2, 3);
  DirectedEdgeSpace sh(h);
  CHECK(sh.size() == 36);
  for (DirEdge e = 0; e < sh.size(); ++e) CHECK(sh.successors(e).size() == 3);
  CHECK(sh.index(0, 1) == h.offset(0));
  CHECK_THROWS_AS(sh.index(0, 4), Error);
  try {
    DirectedEdgeSpace bad(Graph(3, {{0, 1}, {1, 2}}));
    FAIL("expected invalid structure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_structure);
  }
}

TEST_CASE("exact return values") {
  const auto k4 = return_probabilities(complete_graph(4), 0, 6);
  CHECK(k4[1] == 0.0);
  CHECK(k4[2] == 0.0);
  CHECK(k4[3] == doctest::Approx(0.5));
  CHECK(k4[4] == doctest::Approx(0.25));
  const auto c6 = return_probabilities(cycle_graph(6), 2, 18);
  for (std::size_t s = 1; s <= 18; ++s) CHECK(c6[s] == (s % 6 == 0 ? 1.0 : 0.0));
  const auto pet = return_probabilities(petersen_graph(), 3, 6);
  CHECK(pet[3] == 0.0);
  CHECK(pet[4] == 0.0);
  CHECK(pet[5] == doctest::Approx(0.25));
  CHECK(return_probabilities(hamming_graph(2, 3), 4, 3)[3] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("return profile equals path enumeration") {
  for (const auto& g : zoo()) {
    const std::size_t horizon = g.num_vertices() > 20 ? 5 : 8;
    for (Vertex v : {Vertex{0}, static_cast<Vertex>(g.num_vertices() - 1)}) {
      const auto exact = return_probabilities(g, v, horizon);
      const auto brute = oracle::nb_returns(g, v, horizon);
      for (std::size_t s = 0; s <= horizon; ++s) CHECK(exact[s] == doctest::Approx(brute[s]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mass conservation and girth zero-return") {
  for (const auto& g : zoo()) {
    DirectedEdgeSpace space(g);
    Eigen::VectorXd mass = space.start_at_vertex(0);
    for (int s = 0; s < 30; ++s) {
      CHECK(std::abs(mass.sum() - 1.0) < 1e-12);
      mass = space.step(mass);
    }
    const auto gi = girth(g);
    REQUIRE(gi.has_value());
    const auto prof = return_probabilities(g, 0, *gi + 2);
    for (std::size_t s = 1; s < *gi; ++s) CHECK(prof[s] == 0.0);
    // Some vertex lies on a shortest cycle.
    CHECK(average_return_probabilities(g, *gi)[*gi] > 0.0);
  }
  const auto lps = lps_ramanujan_graph(5, 13);
  const auto gl = *girth(lps);
  const auto prof = return_probabilities(lps, 0, gl);
  for (std::size_t s = 1; s < gl; ++s) CHECK(prof[s] == 0.0);
  CHECK(prof[gl] > 0.0);
}

TEST_CASE("vertex-averaged profile") {
  const Graph g = random_regular_graph(12, 3, 21);
  const auto avg = average_return_probabilities(g, 7);
  std::vector<double> manual(8, 0.0);
  for (Vertex v = 0; v < 12; ++v) {
    const auto brute = oracle::nb_returns(g, v, 7);
    for (std::size_t s = 0; s <= 7; ++s) manual[s] += brute[s] / 12.0;
  }
  for (std::size_t s = 0; s <= 7; ++s) CHECK(avg[s] == doctest::Approx(manual[s]).epsilon(1e-12));
  CHECK(avg.averaged_over_vertices);
  CHECK_THROWS_AS(return_probabilities(g, 0, 0), Error);
  CHECK(default_horizon(petersen_graph()) == 2 * 3 + 5);
}

TEST_CASE("sampled walks") {
  Rng rng = make_rng(11);
  const auto c6 = cycle_graph(6);
  std::size_t clockwise = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto path = sample_nbrw(c6, 0, 6, rng);
    CHECK(path.size() == 7);
    CHECK(path.back() == 0);
    clockwise += path[1] == 1;
  }
  CHECK(std::abs(static_cast<double>(clockwise) / 2000.0 - 0.5) < 4.0 * std::sqrt(0.25 / 2000.0));

  const auto k4 = complete_graph(4);
  for (int i = 0; i < 2000; ++i) {
    const auto path = sample_nbrw(k4, 1, 10, rng);
    for (std::size_t j = 2; j < path.size(); ++j) CHECK(path[j] != path[j - 2]);
  }
  const auto sampled = sample_return_probabilities(k4, 0, 4, 100000, rng);
  CHECK(std::abs(sampled.frequency[3] - 0.5) <= 3.0 * sampled.standard_error[3]);

  for (const auto& g : {petersen_graph(), hamming_graph(2, 3), random_regular_graph(12, 3, 2)}) {
    const auto exact = return_probabilities(g, 0, 8);
    const auto mc = sample_return_probabilities(g, 0, 8, 40000, rng);
    for (std::size_t s = 1; s <= 8; ++s) {
      const double se = std::max(mc.standard_error[s], std::sqrt(exact[s] * (1 - exact[s]) / 40000.0));
      CHECK(std::abs(mc.frequency[s] - exact[s]) <= 4.0 * se + 1e-12);
    }
  }
}

TEST_CASE("pairing identity") {
  const auto k4 = complete_graph(4);
  const auto li = loop_identity(k4, 0, 1, 1);
  CHECK(li.lhs == doctest::Approx(1.5));
  CHECK(li.rhs == doctest::Approx(1.5));

  // Left side recomputed from path enumeration.
  auto brute_lhs = [](const Graph& g, Vertex v, std::size_t t, std::size_t t2) {
    auto nb = g.neighbors(v);
    double total = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = 0; j < nb.size(); ++j) {
        if (i == j) continue;
        const auto a = oracle::nb_from_edge(g, v, nb[i], t);
        const auto b = oracle::nb_from_edge(g, v, nb[j], t2);
        for (std::size_t y = 0; y < a.size(); ++y) total += a[y] * b[y];
      }
    return total;
  };
  for (const auto& g : {k4, petersen_graph(), hamming_graph(2, 3)})
    for (std::size_t t = 0; t <= 3; ++t)
      for (std::size_t t2 = 0; t2 <= 3; ++t2)
        CHECK(loop_identity(g, 0, t, t2).lhs == doctest::Approx(brute_lhs(g, 0, t, t2)).epsilon(1e-12));

  for (const auto& g : {k4, petersen_graph(), hamming_graph(2, 3), hamming_graph(3, 3), cycle_graph(8)})
    for (std::size_t t = 0; t <= 6; ++t)
      for (std::size_t t2 = 0; t2 <= 6; ++t2) CHECK(loop_identity_residual(g, 0, t, t2) < 1e-10);

  try {
    loop_identity(Graph(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 2}}), 0, 1, 1);
    FAIL("expected invalid structure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_structure);
  }
}
