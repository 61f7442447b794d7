// Acceptance criteria 1-10.  Prints one line per criterion:
//   criterion N: PASS|FAIL  <measured values>
// Usage: acceptance [--criterion N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "anyonfock/density.hpp"
#include "anyonfock/pointproc.hpp"
#include "anyonfock/qfock.hpp"
#include "anyonfock/quasifree.hpp"
#include "oracles.hpp"

using namespace anyonfock;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Exclusion: a+(h)^k Omega and D+(h)^k Omega vanish for q = exp(2 pi i / k).
void criterion_1(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const Grid grid = Grid::uniform(5, 1, 1.0);
  double fock = 0.0, doubled = 0.0;
  for (int k = 2; k <= 4; ++k) {
    const QKernel kernel = QKernel::from_angle(1, k);
    const SiteSpace space = SiteSpace::from_grid(grid, kernel);
    const DoubledGrid dgrid(grid, kernel);
    const double eta = kernel.eta();
    const KPair pair = KPair::scalar(grid, eta < 0.0 ? std::sqrt(-1.0 / eta) : 1.0, eta);
    for (int i = 0; i < 10; ++i) {
      const GridFunction h = oracle::random_function(5, rng);
      fock = std::max(fock, exclusion_norm(space, h, k, FockVector::vacuum(5, static_cast<std::size_t>(k))));
      doubled = std::max(doubled, d_power_norm(h, k, pair, dgrid));
    }
  }
  const double elapsed = seconds_since(t0);
  out.detail << "max |a+^k Omega| = " << sci(fock) << ", max |D+^k Omega| = " << sci(doubled)
             << ", " << sci(elapsed) << " s";
  out.require(fock <= 1e-10, "Fock norm <= 1e-10");
  out.require(doubled <= 1e-10, "doubled norm <= 1e-10");
  out.require(elapsed < 10.0, "runtime < 10 s");
}

// 2. P_k 1 on a strictly increasing tuple against (1 - q^k)/((1 - q) k!).
void criterion_2(Outcome& out) {
  std::mt19937_64 rng(102);
  const Grid line = Grid::uniform(5, 1, 1.0);
  double worst = 0.0, worst_qfact = 0.0;
  int worst_k = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const QKernel kernel(oracle::random_unit(rng));
    const SiteSpace space = SiteSpace::from_grid(line, kernel);
    const cplx q = kernel.q();
    double factorial = 1.0;
    for (int k = 1; k <= 5; ++k) {
      factorial *= k;
      Tensor ones(static_cast<std::size_t>(k), space.size());
      std::fill(ones.data().begin(), ones.data().end(), cplx(1.0));
      const Tensor p = project_qsym(space, ones);
      std::vector<std::size_t> idx(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) idx[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j);
      const cplx value = p[p.flatten(idx)];
      const cplx stated = (1.0 - std::pow(q, k)) / ((1.0 - q) * factorial);
      const double gap = std::abs(value - stated);
      if (gap > worst) {
        worst = gap;
        worst_k = k;
      }
      worst_qfact = std::max(worst_qfact, std::abs(value - oracle::q_factorial_over_factorial(q, k)));
    }
  }
  out.detail << "max |P_k 1 - (1-q^k)/((1-q)k!)| = " << sci(worst) << " (at k=" << worst_k
             << "); max |P_k 1 - [k]_q!/k!| = " << sci(worst_qfact);
  out.require(worst <= 1e-12, "stated closed form to 1e-12");
}

// 3. P b+(h) = a+(h) P and P b-(conj h) = a-(h) P on levels <= 3.
void criterion_3(Outcome& out) {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (std::size_t fiber : {1, 2}) {
    const SiteSpace space = SiteSpace::from_grid(Grid::uniform(fiber == 1 ? 5 : 3, fiber, 1.0),
                                                 QKernel::from_angle(2, 7));
    const std::size_t s = space.size();
    for (int trial = 0; trial < 10; ++trial) {
      for (std::size_t n = 1; n <= 3; ++n) {
        const GridFunction h = oracle::random_function(s, rng);
        Tensor f = oracle::random_tensor(n, s, rng);
        restrict_off_delta(space, f);
        Tensor plus = project_qsym(space, b_apply(Sign::plus, space, h, f));
        plus -= project_qsym(space, outer(as_tensor(h), n > 1 ? project_qsym(space, f) : f));
        worst = std::max(worst, plus.max_abs());
        Tensor minus = b_apply(Sign::minus, space, conjugate(h), f);
        if (n > 1) minus = project_qsym(space, minus);
        minus -= annihilate_level(space, h, n > 1 ? project_qsym(space, f) : f);
        worst = std::max(worst, minus.max_abs());
      }
    }
  }
  out.detail << "max intertwining residual = " << sci(worst);
  out.require(worst <= 1e-10, "residual <= 1e-10");
}

// 4. Exchange relations exact; mixed residual halves twice; n=1 hand defect.
void criterion_4(Outcome& out) {
  std::mt19937_64 rng(104);
  const QKernel kernel = QKernel::from_angle(1, 5);
  const Grid grid = Grid::uniform(5, 1, 1.0);
  const SiteSpace space = SiteSpace::from_grid(grid, kernel);
  double exchange = 0.0, defect = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    FockVector f(5, 4);
    f.level(0)[0] = oracle::complex_normal(rng);
    f.level(1) = oracle::random_tensor(1, 5, rng);
    f.level(2) = project_qsym(space, oracle::random_tensor(2, 5, rng));
    const QcrResidual r = qcr_residual(space, oracle::random_function(5, rng), oracle::random_function(5, rng), f);
    exchange = std::max({exchange, r.exchange_create, r.exchange_annihilate});

    const GridFunction g = oracle::random_function(5, rng), h = oracle::random_function(5, rng);
    const GridFunction fv = oracle::random_function(5, rng);
    FockVector one(5, 3);
    one.level(1) = as_tensor(fv);
    Tensor diff = qcr_terms(space, g, h, one).mixed.level(1);
    diff -= as_tensor(oracle::mixed_defect(space, g, h, fv));
    defect = std::max(defect, diff.max_abs());
  }
  const auto pg = oracle::Profile::random(1, rng), ph = oracle::Profile::random(1, rng);
  const auto pf = oracle::Profile::random(1, rng);
  std::vector<double> residual;
  Grid g = grid;
  for (int level = 0; level < 3; ++level) {
    const SiteSpace s = SiteSpace::from_grid(g, kernel);
    FockVector f(s.size(), 3);
    f.level(1) = as_tensor(pf.sample(g));
    residual.push_back(qcr_residual(s, pg.sample(g), ph.sample(g), f).mixed);
    g = g.split_cells();
  }
  const double r1 = residual[1] / residual[0], r2 = residual[2] / residual[1];
  out.detail << "exchange = " << sci(exchange) << ", halving ratios = " << sci(r1) << ", " << sci(r2)
             << ", hand defect gap = " << sci(defect);
  out.require(exchange <= 1e-10, "exchange <= 1e-10");
  out.require(std::abs(r1 - 0.5) <= 0.1 && std::abs(r2 - 0.5) <= 0.1, "ratios 0.5 +- 0.1");
  out.require(defect <= 1e-12, "hand defect to 1e-12");
}

// 5. Quasi-free cross-check, degenerations and gauge invariance.
void criterion_5(Outcome& out) {
  std::mt19937_64 rng(105);
  const QKernel kernel = QKernel::from_angle(1, 5);
  const double eta = kernel.eta();
  double cross = 0.0;
  for (int variant = 0; variant < 2; ++variant) {
    const Grid grid = Grid::uniform(4, variant ? 2 : 1, 1.0);
    const DoubledGrid dgrid(grid, kernel);
    Eigen::MatrixXd block(2, 2);
    block << 1.0, 0.3, 0.3, 0.5;
    const KPair pair = variant ? KPair::uniform_block(grid, block, eta) : KPair::scalar(grid, 1.3, eta);
    const std::size_t s = grid.site_count();
    for (std::size_t n = 1; n <= 2; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<GridFunction> gs(n, GridFunction(s, 0.0)), hs(n, GridFunction(s, 0.0));
        for (std::size_t x = 0; x < s; ++x) {
          const std::size_t i = grid.axis_of(x) % n;
          gs[i][x] = oracle::complex_normal(rng);
          hs[i][x] = oracle::complex_normal(rng);
        }
        cross = std::max(cross, crosscheck_npoint(gs, hs, pair, dgrid).residual);
      }
    }
  }

  const Grid line = Grid::uniform(3, 1, 1.0);
  double per = 0.0, det = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<GridFunction> gs, hs;
    for (int i = 0; i < 3; ++i) {
      gs.push_back(oracle::random_function(3, rng));
      hs.push_back(oracle::random_function(3, rng));
    }
    const KPair bose = KPair::scalar(line, 1.2, 1.0);
    Eigen::MatrixXcd m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = s11(gs[static_cast<std::size_t>(i)], hs[static_cast<std::size_t>(j)], bose, line);
    per = std::max(per, std::abs(npoint_qpermanent(gs, hs, bose, line, QKernel(1.0)) - oracle::permanent(m)));

    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t x = 0; x < 3; ++x) {
        if (x != i) gs[i][x] = hs[i][x] = 0.0;
      }
    }
    const KPair fermi = KPair::scalar(line, 0.8, -1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = s11(gs[static_cast<std::size_t>(i)], hs[static_cast<std::size_t>(j)], fermi, line);
    det = std::max(det, std::abs(npoint_qpermanent(gs, hs, fermi, line, QKernel(-1.0)) - oracle::determinant(m)));
  }

  const Grid grid = Grid::uniform(4, 1, 1.0);
  const DoubledGrid dgrid(grid, kernel);
  const KPair pair = KPair::scalar(grid, 1.3, eta);
  double gauge = 0.0;
  const std::vector<std::vector<Sign>> shapes = {
      {Sign::plus}, {Sign::minus}, {Sign::plus, Sign::plus}, {Sign::minus, Sign::minus},
      {Sign::plus, Sign::plus, Sign::minus}, {Sign::minus, Sign::plus, Sign::minus},
      {Sign::plus, Sign::plus, Sign::plus, Sign::minus}};
  for (const auto& shape : shapes) {
    for (int trial = 0; trial < 3; ++trial) {
      Word w;
      for (Sign s : shape) w.push_back({s, oracle::random_function(4, rng)});
      gauge = std::max(gauge, std::abs(tau_vacuum(w, pair, dgrid)));
    }
  }
  out.detail << "Fock vs q-permanent = " << sci(cross) << ", per = " << sci(per) << ", det = " << sci(det)
             << ", unbalanced |tau| = " << sci(gauge);
  out.require(cross <= 1e-10, "cross-check <= 1e-10");
  out.require(per <= 1e-10, "permanent <= 1e-10");
  out.require(det <= 1e-10, "determinant <= 1e-10");
  out.require(gauge <= 1e-12, "gauge <= 1e-12");
}

// 6. Density moments: recursion, exact law and Monte Carlo.
void criterion_6(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(106);
  const Grid grid = Grid::uniform(4, 1, 1.0);
  double rel = 0.0, zmax = 0.0;
  for (double eta : {0.0, 0.5, 1.0}) {
    for (double kappa : {0.5, 1.0, 2.0}) {
      const DensityParams p(eta, kappa);
      const LevyModel model = eta == 0.0 ? build_levy(LevyKind::poisson, 0.0, kappa)
                                         : build_levy(LevyKind::negbin, eta, kappa);
      const SampleMatrix samples = sample_replicates(grid, model, 1000 + rng() % 1000, 1'000'000, 4);
      for (std::size_t n = 1; n <= 5; ++n) {
        std::vector<RealFunction> fs;
        for (std::size_t i = 0; i < n; ++i) fs.push_back(oracle::random_real(4, rng, -1.0, 1.0));
        const double a = rho_moment(fs, p, grid);
        const double b = exact_joint_moment(fs, model, grid);
        rel = std::max(rel, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        const MomentEstimate mc = empirical_joint_moment(fs, samples, grid);
        zmax = std::max({zmax, std::abs(a - mc.mean) / mc.std_error, std::abs(b - mc.mean) / mc.std_error});
      }
    }
  }
  const double elapsed = seconds_since(t0);
  out.detail << "max relative gap = " << sci(rel) << ", max |z| vs Monte Carlo = " << sci(zmax) << ", "
             << sci(elapsed) << " s";
  out.require(rel <= 1e-9, "relative gap <= 1e-9");
  out.require(zmax <= 4.0, "within 4 SE");
  out.require(elapsed < 180.0, "runtime < 3 min");
}

// 7. Negative binomial cell marginals.
void criterion_7(Outcome& out) {
  const Grid grid({1.0, 2.0, 3.0, 4.0}, {0.1, 0.2, 0.3, 0.4});
  double tv = 0.0, zmax = 0.0;
  std::uint64_t seed = 700;
  for (auto [eta, kappa] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}}) {
    const LevyModel model = build_levy(LevyKind::negbin, eta, kappa);
    const SampleMatrix samples = sample_replicates(grid, model, ++seed, 1'000'000, 4);
    for (std::size_t x = 0; x < 4; ++x) {
      const double w = grid.site_weight(x);
      tv = std::max(tv, negbin_tv_distance(empirical_pmf(samples, x), w, eta, kappa));
      RealFunction e(4, 0.0);
      e[x] = 1.0;
      const MomentEstimate m = empirical_joint_moment({e}, samples, grid);
      zmax = std::max(zmax, std::abs(m.mean - kappa * kappa * w) / m.std_error);
    }
  }
  out.detail << "max TV = " << sci(tv) << ", max |z| of cell means = " << sci(zmax);
  out.require(tv <= 0.01, "TV <= 0.01");
  out.require(zmax <= 4.0, "mean within 4 SE");
}

// 8. Positivity witness for negative eta.
void criterion_8(Outcome& out) {
  const Grid half({0.0}, {0.5});
  const double value = positivity_witness({1.0}, -1.0, half);
  std::mt19937_64 rng(108);
  const Grid grid({0.0, 1.0, 2.0}, {0.5, 0.25, 0.25});
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RealFunction f = oracle::random_real(3, rng);
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t x = 0; x < 3; ++x) {
      s2 += f[x] * f[x] * grid.site_weight(x);
      s4 += f[x] * f[x] * f[x] * f[x] * grid.site_weight(x);
    }
    const double expected = 2.0 * s2 * s2 + 2.0 * -0.6 * s4;
    worst = std::max(worst, std::abs(positivity_witness(f, -0.6, grid) - expected) / std::abs(expected));
  }
  out.detail << "witness(indicator, w=1/2, eta=-1) = " << value << ", formula gap = " << sci(worst);
  out.require(value == -0.5, "value exactly -1/2");
  out.require(worst <= 1e-14, "formula reproduced");
}

// 9. Meixner coefficients.
void criterion_9(Outcome& out) {
  double b0 = 0.0, a1 = 0.0, mass = 0.0;
  for (auto [eta, kappa] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}}) {
    const DensityParams p(eta, kappa);
    const MeixnerResult r = meixner_coeffs(p, kMaxMeixnerOrder);
    b0 = std::max(b0, std::abs(r.b[0] - p.lambda));
    a1 = std::max(a1, std::abs(r.a[0] - 2.0 * eta));
    mass = std::max(mass, std::abs(r.total_mass - 1.0));
  }
  out.detail << "|b0 - lambda| = " << sci(b0) << ", |a1 - 2 eta| = " << sci(a1) << ", |mass - 1| = " << sci(mass);
  out.require(b0 <= 1e-8, "b0 to 1e-8");
  out.require(a1 <= 1e-6, "a1 to 1e-6");
  out.require(mass <= 1e-10, "mass to 1e-10");
}

// 10. Gamma limit of the density moments and the gamma Laplace transform.
void criterion_10(Outcome& out) {
  std::mt19937_64 rng(110);
  const Grid grid = Grid::uniform(4, 1, 1.0);
  bool decreasing = true;
  double final_gap = 0.0, zmax = 0.0;
  for (double eta : {0.5, 1.0}) {
    for (int n = 1; n <= 3; ++n) {
      const RealFunction f = oracle::random_real(4, rng, 0.1, 1.0);
      const GammaLimitTable t = gamma_limit_check(f, eta, n, {10.0, 100.0, 1000.0}, grid);
      decreasing = decreasing && t.strictly_decreasing;
      final_gap = std::max(final_gap, t.rows.back().gap / std::abs(t.rows.back().gamma_moment));
    }
    const LevyModel gamma = build_levy(LevyKind::gamma, eta, 1.0);
    for (double s : {0.3, 1.0, 2.5}) {
      RealFunction f(4, 0.0);
      f[1] = -s;
      const LaplaceCheck lc = laplace_check(f, gamma, grid, 1'000'000, 1100 + static_cast<std::uint64_t>(10 * s), 4);
      const double closed = std::pow(1.0 + std::sqrt(eta) * s, -grid.site_weight(1) / eta);
      zmax = std::max(zmax, std::abs(lc.empirical - closed) / lc.std_error);
    }
  }
  out.detail << "gaps strictly decreasing = " << (decreasing ? "yes" : "no") << ", max relative gap at kappa=1000 = "
             << sci(final_gap) << ", Laplace max |z| = " << sci(zmax);
  out.require(decreasing, "strictly decreasing");
  out.require(final_gap <= 0.01, "gap <= 1%");
  out.require(zmax <= 4.0, "Laplace within 4 SE");
}

const std::function<void(Outcome&)> kCriteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                   criterion_5, criterion_6, criterion_7, criterion_8,
                                                   criterion_9, criterion_10};

bool run(int n) {
  Outcome out;
  try {
    kCriteria[n - 1](out);
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  std::printf("criterion %d: %s  %s\n", n, out.passed ? "PASS" : "FAIL", out.detail.str().c_str());
  std::fflush(stdout);
  return out.passed;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    const int n = std::atoi(argv[2]);
    if (n < 1 || n > 10) {
      std::fprintf(stderr, "criterion must be in 1..10\n");
      return 2;
    }
    return run(n) ? 0 : 1;
  }
  if (argc != 1) {
    std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
    return 2;
  }
  bool all = true;
  for (int n = 1; n <= 10; ++n) all = run(n) && all;
  return all ? 0 : 1;
}
