#include <cmath>
#include <random>

#include "doctest.h"

#include "anyonfock/quasifree.hpp"
#include "oracles.hpp"

using namespace anyonfock;

namespace {

Eigen::MatrixXd block2() {
  Eigen::MatrixXd t(2, 2);
  t << 1.0, 0.3, 0.3, 0.5;
  return t;
}

}  // namespace

TEST_CASE("doubled twist") {
  const Grid g = Grid::uniform(3, 1, 1.0);
  const QKernel k = QKernel::from_angle(1, 5);
  const DoubledGrid d(g, k);
  const std::size_t s = g.site_count();
  CHECK(d.space().size() == 2 * s);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      const double x = g.site_coord(a), y = g.site_coord(b);
      CHECK(std::abs(d.jq(a, b) - k(x, y)) < 1e-15);
      CHECK(std::abs(d.jq(s + a, s + b) - k(x, y)) < 1e-15);
      CHECK(std::abs(d.jq(a, s + b) - k(y, x)) < 1e-15);
      CHECK(std::abs(d.jq(s + a, b) - k(y, x)) < 1e-15);
      if (a != b) CHECK(std::abs(std::abs(d.jq(a, s + b)) - 1.0) < 1e-15);
    }
    CHECK(d.space().delta_related(a, s + a));
    CHECK(std::abs(d.jq(a, s + a) - k.eta()) < 1e-15);
  }
  CHECK_THROWS_AS(d.embed(GridFunction(s), 2), std::invalid_argument);
}

TEST_CASE("K pair invariants") {
  const Grid g = Grid::uniform(3, 2, 1.0);
  for (double eta : {1.0, 0.0, -0.5}) {
    const KPair p = KPair::uniform_block(g, block2(), eta);
    CHECK(p.constraint_residual() < 1e-12);
    CHECK(p.multiplication_commutator({0.3, -1.0, 2.0}) < 1e-12);
    CHECK((p.k1_block(0) * p.k1_block(0) - block2()).norm() < 1e-12);
  }
  CHECK(KPair::scalar(Grid::uniform(2, 1, 1.0), 1.5, 0.5).constraint_residual() < 1e-12);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.5, 1.0;
  CHECK_THROWS_AS(KPair::uniform_block(g, bad, 1.0), std::invalid_argument);
  bad << -1.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(KPair::uniform_block(g, bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KPair::uniform_block(g, 3.0 * block2(), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(KPair::scalar(g, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KPair::uniform_block(g, Eigen::MatrixXd::Identity(3, 3), 1.0), std::invalid_argument);
}

TEST_CASE("d operators on the vacuum") {
  std::mt19937_64 rng(30);
  const Grid g = Grid::uniform(3, 1, 1.0);
  const double kappa = 0.8, eta = -0.5;
  const DoubledGrid d(g, QKernel::from_angle(1, 3));
  const KPair p = KPair::scalar(g, kappa, eta);
  const GridFunction h = oracle::random_function(3, rng);
  const FockVector omega = FockVector::vacuum(6, 1);
  const FockVector minus = d_apply(Sign::minus, h, p, d, omega);
  const FockVector plus = d_apply(Sign::plus, h, p, d, omega);
  for (std::size_t x = 0; x < 3; ++x) {
    CHECK(std::abs(minus.level(1)[x] - kappa * h[x]) < 1e-15);
    CHECK(std::abs(minus.level(1)[3 + x]) == 0.0);
    CHECK(std::abs(plus.level(1)[3 + x] - std::sqrt(1.0 + eta * kappa * kappa) * h[x]) < 1e-15);
    CHECK(std::abs(plus.level(1)[x]) == 0.0);
  }
  FockVector full(6, 1);
  full.level(1)[0] = 1.0;
  CHECK_THROWS_AS(d_apply(Sign::plus, h, p, d, full), HeadroomError);
}

TEST_CASE("vacuum expectations") {
  std::mt19937_64 rng(31);
  const Grid single({0.0}, {1.0});
  const double kappa = 1.7;
  const DoubledGrid d(single, QKernel::from_angle(1, 4));
  const KPair p = KPair::scalar(single, kappa, 0.0);
  const Word w{{Sign::plus, {1.0}}, {Sign::minus, {1.0}}};
  CHECK(std::abs(tau_vacuum(w, p, d) - kappa * kappa) < 1e-12);
  CHECK(tau_vacuum({}, p, d) == cplx(1.0));

  const Grid g = Grid::uniform(4, 1, 2.0);
  const DoubledGrid dg(g, QKernel::from_angle(2, 5));
  // eta < 0 here, so kappa^2 must stay below -1/eta
  const double small = 0.9;
  const KPair pg = KPair::scalar(g, small, dg.kernel().eta());
  CHECK(std::abs(s11(GridFunction(4, 1.0), GridFunction(4, 1.0), pg, g) - small * small * 2.0) < 1e-12);
  GridFunction a(4, 0.0), b(4, 0.0);
  a[0] = 1.0;
  b[2] = 1.0;
  CHECK(s11(a, b, pg, g) == cplx(0.0));
  for (int trial = 0; trial < 5; ++trial) {
    const GridFunction x = oracle::random_function(4, rng), y = oracle::random_function(4, rng);
    CHECK(std::abs(tau_vacuum({{Sign::plus, x}, {Sign::minus, y}}, pg, dg) - s11(x, y, pg, g)) < 1e-12);
  }
  // unbalanced words vanish
  for (int trial = 0; trial < 5; ++trial) {
    Word u;
    for (Sign s : {Sign::plus, Sign::plus, Sign::minus}) u.push_back({s, oracle::random_function(4, rng)});
    CHECK(std::abs(tau_vacuum(u, pg, dg)) < 1e-12);
    u.resize(1);
    CHECK(std::abs(tau_vacuum(u, pg, dg)) < 1e-12);
  }
  // a larger explicit truncation gives the same value
  Word four;
  for (Sign s : {Sign::plus, Sign::minus, Sign::plus, Sign::minus}) four.push_back({s, oracle::random_function(4, rng)});
  CHECK(std::abs(tau_vacuum(four, pg, dg) - tau_vacuum(four, pg, dg, 4)) < 1e-12);
}

TEST_CASE("block T two-point function") {
  std::mt19937_64 rng(32);
  const Grid g = Grid::uniform(3, 2, 1.0);
  const DoubledGrid d(g, QKernel::from_angle(1, 6));
  const KPair p = KPair::uniform_block(g, block2(), d.kernel().eta());
  for (int trial = 0; trial < 5; ++trial) {
    const GridFunction x = oracle::random_function(6, rng), y = oracle::random_function(6, rng);
    CHECK(std::abs(tau_vacuum({{Sign::plus, x}, {Sign::minus, y}}, p, d) - s11(x, y, p, g)) < 1e-10);
  }
}

TEST_CASE("q-permanent against a brute-force double loop") {
  std::mt19937_64 rng(33);
  const Grid g = Grid::uniform(3, 1, 1.0);
  const QKernel k = QKernel::from_angle(2, 7);
  const KPair p = KPair::scalar(g, 1.3, k.eta());
  const std::vector<GridFunction> gs{oracle::random_function(3, rng), oracle::random_function(3, rng)};
  const std::vector<GridFunction> hs{oracle::random_function(3, rng), oracle::random_function(3, rng)};
  const double t = 1.3 * 1.3;
  cplx expected = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double w = g.site_weight(a) * g.site_weight(b);
      expected += gs[0][a] * t * hs[0][a] * gs[1][b] * t * hs[1][b] * w;
      expected += k(g.site_coord(a), g.site_coord(b)) * gs[0][a] * t * hs[1][a] * gs[1][b] * t * hs[0][b] * w;
    }
  }
  CHECK(std::abs(npoint_qpermanent(gs, hs, p, g, k) - expected) < 1e-12);

  std::vector<GridFunction> many(7, GridFunction(3, 1.0));
  CHECK_THROWS_AS(npoint_qpermanent(many, many, p, g, k), std::invalid_argument);
  CHECK_THROWS_AS(npoint_qpermanent(gs, {hs[0]}, p, g, k), std::invalid_argument);
}

TEST_CASE("q-permanent degenerations") {
  std::mt19937_64 rng(34);
  const Grid g = Grid::uniform(3, 1, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<GridFunction> gs, hs;
    for (int i = 0; i < 3; ++i) {
      gs.push_back(oracle::random_function(3, rng));
      hs.push_back(oracle::random_function(3, rng));
    }
    const KPair bose = KPair::scalar(g, 1.1, 1.0);
    Eigen::MatrixXcd s(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = s11(gs[static_cast<std::size_t>(i)], hs[static_cast<std::size_t>(j)], bose, g);
    CHECK(std::abs(npoint_qpermanent(gs, hs, bose, g, QKernel(1.0)) - oracle::permanent(s)) < 1e-10);
    CHECK(std::abs(permanent(s) - oracle::permanent(s)) < 1e-12);
    CHECK(std::abs(determinant(s) - oracle::determinant(s)) < 1e-12);

    // distinct axis supports for the fermion case
    for (int i = 0; i < 3; ++i) {
      for (std::size_t x = 0; x < 3; ++x) {
        if (x != static_cast<std::size_t>(i)) {
          gs[static_cast<std::size_t>(i)][x] = 0.0;
          hs[static_cast<std::size_t>(i)][x] = 0.0;
        }
      }
    }
    const KPair fermi = KPair::scalar(g, 0.9, -1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = s11(gs[static_cast<std::size_t>(i)], hs[static_cast<std::size_t>(j)], fermi, g);
    CHECK(std::abs(npoint_qpermanent(gs, hs, fermi, g, QKernel(-1.0)) - oracle::determinant(s)) < 1e-10);
  }
}

TEST_CASE("Fock route against the q-permanent") {
  std::mt19937_64 rng(35);
  for (std::size_t fiber : {1, 2}) {
    const Grid g = Grid::uniform(4, fiber, 1.0);
    const DoubledGrid d(g, QKernel::from_angle(1, 5));
    const KPair p = fiber == 1 ? KPair::scalar(g, 1.2, d.kernel().eta())
                               : KPair::uniform_block(g, block2(), d.kernel().eta());
    const std::size_t s = g.site_count();
    for (int trial = 0; trial < 3; ++trial) {
      CHECK(crosscheck_npoint({oracle::random_function(s, rng)}, {oracle::random_function(s, rng)}, p, d)
                .residual < 1e-12);
      std::vector<GridFunction> gs(2, GridFunction(s, 0.0)), hs(2, GridFunction(s, 0.0));
      for (std::size_t x = 0; x < s; ++x) {
        const std::size_t i = g.axis_of(x) % 2;
        gs[i][x] = oracle::complex_normal(rng);
        hs[i][x] = oracle::complex_normal(rng);
      }
      CHECK(crosscheck_npoint(gs, hs, p, d).residual < 1e-10);
    }
  }
}

TEST_CASE("overlapping smears converge at first order") {
  std::mt19937_64 rng(36);
  const QKernel k = QKernel::from_angle(1, 5);
  const auto p1 = oracle::Profile::random(1, rng), p2 = oracle::Profile::random(1, rng);
  const auto p3 = oracle::Profile::random(1, rng), p4 = oracle::Profile::random(1, rng);
  Grid g = Grid::uniform(4, 1, 1.0).split_cells();
  std::vector<double> r;
  for (int level = 0; level < 3; ++level) {
    const DoubledGrid d(g, k);
    r.push_back(crosscheck_npoint({p1.sample(g), p2.sample(g)}, {p3.sample(g), p4.sample(g)},
                                  KPair::scalar(g, 1.0, k.eta()), d)
                    .residual);
    g = g.split_cells();
  }
  CHECK(r[0] > 1e-6);
  CHECK(r[1] / r[0] == doctest::Approx(0.5).epsilon(0.2));
  CHECK(r[2] / r[1] == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("Gram matrices are positive semidefinite") {
  std::mt19937_64 rng(37);
  const Grid g = Grid::uniform(3, 1, 1.0);
  for (int angle : {1, 2, 3}) {
    const DoubledGrid d(g, QKernel::from_angle(angle, 7));
    const double eta = d.kernel().eta();
    const double kappa = eta < 0.0 ? std::sqrt(-1.0 / eta) : 1.5;
    const KPair p = KPair::scalar(g, kappa, eta);
    std::vector<Word> words;
    for (int i = 0; i < 4; ++i) words.push_back({{Sign::minus, oracle::random_function(3, rng)}});
    for (int i = 0; i < 3; ++i) {
      words.push_back({{Sign::minus, oracle::random_function(3, rng)}, {Sign::minus, oracle::random_function(3, rng)}});
    }
    const Eigen::MatrixXcd gram = gram_matrix(words, p, d);
    CHECK((gram - gram.adjoint()).norm() < 1e-10);
    CHECK(min_eigenvalue(gram) > -1e-9);
  }
}

TEST_CASE("adjoint word") {
  const Word w{{Sign::plus, {cplx(1.0, 2.0)}}, {Sign::minus, {cplx(0.0, -1.0)}}};
  const Word a = adjoint(w);
  REQUIRE(a.size() == 2);
  CHECK(a[0].sign == Sign::plus);
  CHECK(a[0].smear[0] == cplx(0.0, 1.0));
  CHECK(a[1].sign == Sign::minus);
  CHECK(a[1].smear[0] == cplx(1.0, -2.0));
}

TEST_CASE("doubled exclusion") {
  std::mt19937_64 rng(38);
  const Grid g = Grid::uniform(5, 1, 1.0);
  for (int k = 2; k <= 4; ++k) {
    const DoubledGrid d(g, QKernel::from_angle(1, k));
    const double eta = d.kernel().eta();
    const KPair p = KPair::scalar(g, eta < 0.0 ? 0.9 : 1.0, eta);
    for (int trial = 0; trial < 3; ++trial) {
      CHECK(d_power_norm(oracle::random_function(5, rng), k, p, d) < 1e-9);
    }
  }
  const DoubledGrid generic(g, QKernel(cplx(std::cos(1.0), std::sin(1.0))));
  const KPair p = KPair::scalar(g, 1.0, generic.kernel().eta());
  CHECK(d_power_norm(oracle::random_function(5, rng), 3, p, generic) > 1e-3);
  CHECK_THROWS_AS(d_power_norm(GridFunction(5, 1.0), 0, p, generic), std::invalid_argument);
}
