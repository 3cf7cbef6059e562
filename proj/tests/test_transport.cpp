#include <doctest.h>

#include <cmath>

#include "bt/transport.hpp"
#include "oracles.hpp"

using namespace bt;
using oracle::Rng;

namespace {

template <Scalar T>
TransportLaw<T> random_law(Rng& rng, std::size_t n, std::size_t samples) {
  const auto family = oracle::random_frame_family<T>(rng, n);
  return TransportLaw<T>(
      sample_analytic<T>([family](double s) { return family(s); }, Grid::uniform(0, 3, samples - 1)));
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("identity frame gives identity transport") {
    const TransportLaw<double> law(
        MatrixField<double>(Grid::uniform(0, 1, 3), std::vector<RMatrix>(4, RMatrix::identity(3))));
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t s = 0; s < 4; ++s) CHECK(transport_matrix(law, t, s) == RMatrix::identity(3));
  }

  TEST_CASE("scalar exponential frame") {
    const Grid grid = Grid::uniform(0, 2, 4);
    const auto law = TransportLaw<double>(
        sample_analytic<double>([](double s) { return RMatrix::identity(2) * std::exp(s); }, grid));
    for (std::size_t t = 0; t < grid.size(); ++t)
      for (std::size_t s = 0; s < grid.size(); ++s) {
        const RMatrix h = transport_matrix(law, t, s);
        CHECK(norm(h - RMatrix::identity(2) * std::exp(grid[s] - grid[t])) <= 1e-14 * norm(h));
      }
  }

  TEST_CASE("group property on random laws") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      const auto law = random_law<Complex>(rng, rng.index(1, 6), 6);
      for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t s = 0; s < 6; ++s)
          for (std::size_t r = 0; r < 6; ++r) {
            const CMatrix lhs = transport_matrix(law, t, s) * transport_matrix(law, s, r);
            CHECK(norm(lhs - transport_matrix(law, t, r)) <= 1e-11);
          }
    }
  }

  TEST_CASE("apply moves vectors and round-trips") {
    Rng rng(32);
    const auto law = random_law<double>(rng, 3, 5);
    const FibreVector<double> u{{1.0, -2.0, 0.5}, 1};
    const auto v = apply(law, 4, 1, u);
    CHECK(v.at == 4);
    const auto w = apply(law, 1, 4, v);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w.components[i] - u.components[i]) <= 1e-12);
    CHECK_THROWS_AS(apply(law, 2, 0, u), Error);
    CHECK_THROWS_AS(apply(law, 2, 1, FibreVector<double>{{1.0}, 1}), Error);
  }

  TEST_CASE("rotation transport preserves Euclidean length") {
    const Grid grid = Grid::uniform(0, 1, 5);
    const auto law = TransportLaw<double>(sample_analytic<double>(
        [](double s) {
          return RMatrix{{std::cos(s), -std::sin(s)}, {std::sin(s), std::cos(s)}};
        },
        grid));
    const auto v = apply(law, 5, 0, FibreVector<double>{{0.6, 0.8}, 0});
    CHECK(std::hypot(v.components[0], v.components[1]) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("gauge transforms leave transport matrices unchanged") {
    Rng rng(33);
    const auto law = random_law<Complex>(rng, 4, 5);
    const CMatrix dg = oracle::random_frame_family<Complex>(rng, 4)(0.3);
    const auto moved = gauge_transform(law, dg);
    CHECK(gauge_transform(law, CMatrix::identity(4)).frame()[2] == law.frame()[2]);
    for (std::size_t t = 0; t < 5; ++t)
      for (std::size_t s = 0; s < 5; ++s)
        CHECK(norm(transport_matrix(moved, t, s) - transport_matrix(law, t, s)) <= 1e-12);
    try {
      gauge_transform(law, CMatrix(4, 4));
      FAIL("expected SingularGauge");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingularGauge);
    }
  }

  TEST_CASE("canonicalize pins the first frame to the identity") {
    Rng rng(34);
    const auto law = random_law<double>(rng, 3, 4);
    const auto c = canonicalize(law);
    CHECK(norm(c.frame()[0] - RMatrix::identity(3)) <= 1e-14);
    CHECK(norm(transport_matrix(c, 3, 1) - transport_matrix(law, 3, 1)) <= 1e-12);
    const auto exp_law = TransportLaw<double>(sample_analytic<double>(
        [](double s) { return RMatrix::identity(2) * std::exp(s); }, Grid::uniform(0, 1, 2)));
    CHECK(canonicalize(exp_law).frame()[2] == exp_law.frame()[2]);
  }

  TEST_CASE("singular frames are rejected at construction") {
    std::vector<RMatrix> frames(3, RMatrix::identity(2));
    frames[1] = RMatrix{{1, 2}, {2, 4}};
    try {
      TransportLaw<double>(MatrixField<double>(Grid::uniform(0, 1, 2), frames));
      FAIL("expected SingularFrame");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingularFrame);
    }
  }
}
