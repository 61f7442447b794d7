#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "anyonfock/qcore.hpp"
#include "oracles.hpp"

using namespace anyonfock;

TEST_CASE("kernel values off and on the diagonal") {
  const QKernel k(cplx(0.0, 1.0));
  CHECK(std::abs(kernel_eval(k, 1.0, 2.0) - cplx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(kernel_eval(k, 2.0, 1.0) - cplx(0.0, -1.0)) < 1e-15);
  CHECK(kernel_eval(k, 3.0, 3.0) == cplx(0.0));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const cplx q = oracle::random_unit(rng);
    CHECK(std::abs(QKernel(q)(0.5, 0.5) - q.real()) < 1e-15);
  }
  const QKernel bose(1.0);
  CHECK(bose(1.0, 2.0) == cplx(1.0));
  CHECK(bose(2.0, 1.0) == cplx(1.0));
  CHECK(bose(2.0, 2.0) == cplx(1.0));
}

TEST_CASE("eta override is kept on the diagonal") {
  const QKernel k(cplx(0.0, 1.0), -0.25);
  CHECK(k.eta() == -0.25);
  CHECK(k(1.0, 1.0) == cplx(-0.25));
}

TEST_CASE("twist is hermitian off the diagonal") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const QKernel k = QKernel::from_angle(2, 7);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng), t = u(rng);
    if (s == t) continue;
    CHECK(std::abs(k(s, t) - std::conj(k(t, s))) < 1e-15);
  }
}

TEST_CASE("kernel rejects bad input") {
  CHECK_THROWS_AS(QKernel(cplx(2.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(QKernel(cplx(1.0, 0.0), std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(QKernel::from_angle(1, 0), std::invalid_argument);
}

TEST_CASE("rational angles give exact roots of unity") {
  for (int k = 2; k <= 8; ++k) {
    const QKernel q = QKernel::from_angle(1, k);
    CHECK(q.is_nontrivial_root_of_unity(k));
    for (int j = 2; j < k; ++j) CHECK_FALSE(q.is_nontrivial_root_of_unity(j));
    CHECK(std::abs(std::pow(q.q(), k) - 1.0) < 1e-14);
  }
  CHECK(std::abs(QKernel::from_angle(1, 2).q() - cplx(-1.0)) < 1e-16);
  CHECK(std::abs(QKernel::from_angle(1, 4).q() - cplx(0.0, 1.0)) < 1e-16);
  CHECK(std::abs(QKernel::from_angle(-1, 4).q() - cplx(0.0, -1.0)) < 1e-16);
  CHECK(std::abs(QKernel::from_angle(1, -4).q() - cplx(0.0, -1.0)) < 1e-16);
  CHECK_FALSE(QKernel(1.0).is_nontrivial_root_of_unity(1));
  CHECK(QKernel::from_angle(3, 6).eta() == doctest::Approx(-1.0));
}

TEST_CASE("q_pi examples") {
  const QKernel k(cplx(0.0, 1.0));
  const std::vector<double> coords{1.0, 2.0, 3.0};
  CHECK(q_pi(k, coords, Permutation{0, 1, 2}) == cplx(1.0));
  const std::vector<double> two{1.0, 2.0};
  CHECK(std::abs(q_pi(k, two, Permutation{1, 0}) - k.q()) < 1e-15);

  const QKernel fermi(-1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int n = 1; n <= 5; ++n) {
    for (const auto& pi : all_permutations(n)) {
      std::vector<double> c(static_cast<std::size_t>(n));
      for (auto& x : c) x = u(rng);
      const double sign = inversion_count(pi) % 2 ? -1.0 : 1.0;
      CHECK(std::abs(q_pi(fermi, c, pi) - sign) < 1e-15);
    }
  }
}

TEST_CASE("q_pi cocycle on increasing coordinates") {
  // Q_{pi sigma}(x) = Q_pi(x permuted by sigma) Q_sigma(x), where the
  // permuted tuple is (x_{sigma^-1(1)}, ...).
  const QKernel k = QKernel::from_angle(2, 9);
  for (int n = 1; n <= 4; ++n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = 0.5 + i;
    for (const auto& pi : all_permutations(n)) {
      for (const auto& sigma : all_permutations(n)) {
        Permutation comp(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          comp[static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])];
        }
        std::vector<double> moved(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) moved[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])] = x[static_cast<std::size_t>(i)];
        CHECK(std::abs(q_pi(k, x, comp) - q_pi(k, moved, pi) * q_pi(k, x, sigma)) < 1e-14);
      }
    }
  }
}

TEST_CASE("q_pi errors") {
  const QKernel k(1.0);
  const std::vector<double> c{1.0, 2.0};
  CHECK_THROWS_AS(q_pi(k, c, Permutation{0}), std::invalid_argument);
  CHECK_THROWS_AS(q_pi(k, c, Permutation{0, 0}), std::invalid_argument);
}

TEST_CASE("permutations") {
  CHECK(all_permutations(0).size() == 1);
  CHECK(all_permutations(4).size() == 24);
  const auto perms = all_permutations(3);
  CHECK(perms.front() == Permutation{0, 1, 2});
  CHECK(perms.back() == Permutation{2, 1, 0});
  for (const auto& p : all_permutations(4)) {
    const Permutation inv = inverse(p);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(inv[static_cast<std::size_t>(p[i])] == static_cast<int>(i));
  }
  CHECK(inversion_count(Permutation{2, 1, 0}) == 3);
}

TEST_CASE("grid construction and refinement") {
  const Grid g = Grid::uniform(4, 2, 2.0);
  CHECK(g.axis_size() == 4);
  CHECK(g.site_count() == 8);
  CHECK(g.total_mass() == doctest::Approx(2.0));
  CHECK(g.coord(0) == 1.0);
  CHECK(g.coord(3) == 4.0);
  CHECK(g.site(2, 1) == 5);
  CHECK(g.axis_of(5) == 2);
  CHECK(g.fiber_of(5) == 1);
  CHECK(g.mass_position(0) == doctest::Approx(0.125));

  const Grid s = g.split_cells();
  CHECK(s.axis_size() == 8);
  CHECK(s.max_weight() == doctest::Approx(0.25));
  CHECK(s.total_mass() == doctest::Approx(2.0));
  for (std::size_t a = 1; a < s.axis_size(); ++a) CHECK(s.coord(a) > s.coord(a - 1));
  CHECK(s.mass_position(0) == doctest::Approx(0.0625));

  const Grid r = g.rescaled(0.5);
  CHECK(r.total_mass() == doctest::Approx(1.0));
  CHECK_THROWS_AS(g.rescaled(0.0), std::invalid_argument);
}

TEST_CASE("grid errors") {
  CHECK_THROWS_AS(Grid({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({1.0, 2.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({2.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({1.0}, {1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::uniform(0, 1, 1.0), std::invalid_argument);
}

TEST_CASE("integrate") {
  const Grid g({0.0, 1.0, 3.0}, {0.2, 0.5, 0.3}, 2);
  Tensor ones(1, g.site_count());
  for (auto& v : ones.data()) v = 1.0;
  // every fiber copy carries the axis weight
  CHECK(std::abs(integrate(g, ones) - 2.0) < 1e-15);

  std::mt19937_64 rng(4);
  const GridFunction a = oracle::random_function(g.site_count(), rng);
  const GridFunction b = oracle::random_function(g.site_count(), rng);
  const Tensor ab = outer(as_tensor(a), as_tensor(b));
  CHECK(std::abs(integrate(g, ab) - integrate(g, as_tensor(a)) * integrate(g, as_tensor(b))) < 1e-13);

  for (int i = 0; i < 5; ++i) {
    const Tensor t = oracle::random_tensor(3, g.site_count(), rng);
    CHECK(std::abs(integrate(g, t) - oracle::naive_integrate(g, t)) < 1e-12);
    Tensor t2 = oracle::random_tensor(3, g.site_count(), rng);
    Tensor sum = t;
    sum += t2;
    CHECK(std::abs(integrate(g, sum) - integrate(g, t) - integrate(g, t2)) < 1e-12);
  }
  RealTensor pos(2, g.site_count());
  for (auto& v : pos.data()) v = 0.1;
  Tensor lo(2, g.site_count()), hi(2, g.site_count());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = 0.1;
    hi[i] = 0.1 + static_cast<double>(i % 3);
  }
  CHECK(integrate(g, hi).real() >= integrate(g, lo).real());
  CHECK_THROWS_AS(integrate(g, Tensor(1, 3)), std::invalid_argument);
}

TEST_CASE("tensor size guard") {
  const std::size_t old = tensor_entry_cap();
  set_tensor_entry_cap(1000);
  CHECK_THROWS_AS(Tensor(3, 11), ResourceError);
  CHECK_NOTHROW(Tensor(3, 10));
  set_tensor_entry_cap(old);
  CHECK_THROWS_AS(Tensor(8, 8), ResourceError);
  CHECK(checked_tensor_size(2, 5) == 25);
}

TEST_CASE("tensor index round trip") {
  Tensor t(3, 4);
  std::vector<std::size_t> idx(3);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    t.unflatten(flat, idx);
    CHECK(t.flatten(idx) == flat);
  }
  idx = {1, 2, 3};
  CHECK(t.flatten(idx) == 1 * 16 + 2 * 4 + 3);
}
