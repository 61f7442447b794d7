#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

#include "anyonfock/cli.hpp"
#include "anyonfock/density.hpp"
#include "anyonfock/pointproc.hpp"
#include "anyonfock/qfock.hpp"
#include "anyonfock/quasifree.hpp"

namespace anyonfock {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t mix_seed(std::uint64_t seed, const std::string& label) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t x = seed ^ h;
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Recorder {
 public:
  Recorder(std::string suite, Report& report) : suite_(std::move(suite)), report_(report) {}

  // Runs body, which returns {computed, expected}, and records the verdict.
  void check(const std::string& name, double tolerance, CheckMode mode,
             const std::function<std::pair<double, double>()>& body) {
    const auto t0 = Clock::now();
    const auto [computed, expected] = body();
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    CheckRecord r;
    r.suite = suite_;
    r.name = name;
    r.computed = computed;
    r.expected = expected;
    r.tolerance = tolerance;
    r.mode = mode;
    r.passed = evaluate_check(mode, computed, expected, tolerance);
    r.runtime = elapsed;
    report_.records.push_back(r);
  }

  void table(Table t) { report_.tables.push_back(std::move(t)); }

 private:
  std::string suite_;
  Report& report_;
};

cplx complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

GridFunction random_function(std::size_t sites, std::mt19937_64& rng) {
  GridFunction f(sites);
  for (auto& v : f) v = complex_normal(rng);
  return f;
}

RealFunction random_real(std::size_t sites, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealFunction f(sites);
  for (auto& v : f) v = u(rng);
  return f;
}

// Smooth profile on (0,1) with random coefficients, one per fiber index,
// sampled at the mass position of every axis cell.
struct Profile {
  std::vector<std::vector<cplx>> coeffs;  // [fiber][mode]

  static Profile random(std::size_t fiber_dim, std::mt19937_64& rng) {
    Profile p;
    p.coeffs.resize(fiber_dim);
    for (auto& c : p.coeffs) {
      for (int j = 0; j < 4; ++j) c.push_back(complex_normal(rng));
    }
    return p;
  }

  GridFunction sample(const Grid& grid) const {
    GridFunction f(grid.site_count());
    for (std::size_t s = 0; s < grid.site_count(); ++s) {
      const double t = grid.mass_position(grid.axis_of(s));
      const auto& c = coeffs[grid.fiber_of(s)];
      cplx v = c[0];
      for (std::size_t j = 1; j < c.size(); ++j) {
        v += c[j] * std::exp(cplx(0.0, std::numbers::pi * static_cast<double>(j) * t)) /
             static_cast<double>(j);
      }
      f[s] = v;
    }
    return f;
  }
};

Tensor random_tensor(std::size_t order, std::size_t sites, std::mt19937_64& rng) {
  Tensor t(order, sites);
  for (auto& v : t.data()) v = complex_normal(rng);
  return t;
}

FockVector random_fock(const SiteSpace& space, std::size_t max_level, std::size_t top,
                       std::mt19937_64& rng) {
  FockVector f(space.size(), max_level);
  f.level(0)[0] = complex_normal(rng);
  for (std::size_t n = 1; n <= top; ++n) {
    f.level(n) = project_qsym(space, random_tensor(n, space.size(), rng));
  }
  return f;
}

double vector_norm(const SiteSpace& space, const FockVector& f) { return fock_norm(space, f); }

// Smallest k in 2..limit with q^k = 1, or 0.
int root_order(const QKernel& kernel, int limit) {
  for (int k = 2; k <= limit; ++k) {
    if (kernel.is_nontrivial_root_of_unity(k, 1e-12)) return k;
  }
  return 0;
}

cplx q_factorial_over_factorial(cplx q, int k) {
  cplx value = 1.0;
  for (int j = 1; j <= k; ++j) {
    cplx bracket = 0.0;
    cplx power = 1.0;
    for (int i = 0; i < j; ++i) {
      bracket += power;
      power *= q;
    }
    value *= bracket / static_cast<double>(j);
  }
  return value;
}

// Hand formula for the mixed-relation defect on a level-1 vector f:
//   -sum_{u~v} conj(g(u)) w(u) [h(u) f(v) + eta h(v) f(u)].
GridFunction mixed_defect_level1(const SiteSpace& space, const GridFunction& g,
                                 const GridFunction& h, const GridFunction& f) {
  GridFunction d(space.size(), 0.0);
  for (std::size_t v = 0; v < space.size(); ++v) {
    for (std::size_t u = 0; u < space.size(); ++u) {
      if (!space.delta_related(u, v)) continue;
      d[v] -= std::conj(g[u]) * space.weight(u) * (h[u] * f[v] + space.eta() * h[v] * f[u]);
    }
  }
  return d;
}

double level_distance(const SiteSpace& space, const Tensor& a, const GridFunction& b) {
  FockVector diff(space.size(), 1);
  for (std::size_t s = 0; s < space.size(); ++s) diff.level(1)[s] = a[s] - b[s];
  return fock_norm(space, diff);
}

// ---------------------------------------------------------------------------

void run_qcr(const ExperimentConfig& c, Report& report) {
  Recorder rec("qcr", report);
  const Grid grid = c.grid.build();
  const QKernel kernel = c.kernel.build();
  const SiteSpace space = SiteSpace::from_grid(grid, kernel);
  const std::size_t sites = space.size();
  const std::size_t n_max = c.max_level;
  std::mt19937_64 rng(mix_seed(c.seed, "qcr"));

  rec.check("exchange_create_residual", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const FockVector f = random_fock(space, n_max, n_max - 2, rng);
      worst = std::max(worst, qcr_residual(space, random_function(sites, rng),
                                           random_function(sites, rng), f)
                                  .exchange_create);
    }
    return std::pair{worst, 0.0};
  });
  rec.check("exchange_annihilate_residual", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const FockVector f = random_fock(space, n_max, n_max - 2, rng);
      worst = std::max(worst, qcr_residual(space, random_function(sites, rng),
                                           random_function(sites, rng), f)
                                  .exchange_annihilate);
    }
    return std::pair{worst, 0.0};
  });
  rec.check("mixed_residual_vacuum", 1e-12, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      worst = std::max(worst, qcr_residual(space, random_function(sites, rng),
                                           random_function(sites, rng),
                                           FockVector::vacuum(sites, n_max))
                                  .mixed);
    }
    return std::pair{worst, 0.0};
  });
  rec.check("mixed_residual_equals_hand_defect", 1e-12, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const GridFunction g = random_function(sites, rng);
      const GridFunction h = random_function(sites, rng);
      const GridFunction fv = random_function(sites, rng);
      FockVector f(sites, n_max);
      f.level(1) = as_tensor(fv);
      const QcrTerms terms = qcr_terms(space, g, h, f);
      worst = std::max(worst, level_distance(space, terms.mixed.level(1),
                                             mixed_defect_level1(space, g, h, fv)));
    }
    return std::pair{worst, 0.0};
  });

  // Refinement scaling of the mixed residual on a level-1 vector.
  {
    const Profile pg = Profile::random(grid.fiber_dim(), rng);
    const Profile ph = Profile::random(grid.fiber_dim(), rng);
    const Profile pf = Profile::random(grid.fiber_dim(), rng);
    Table table{"qcr_scaling", {"refinement", "max_weight", "residual", "ratio"}, {}};
    std::vector<double> residuals;
    Grid g = grid;
    for (int level = 0; level < 3; ++level) {
      const SiteSpace sp = SiteSpace::from_grid(g, kernel);
      FockVector f(sp.size(), 3);
      f.level(1) = as_tensor(pf.sample(g));
      residuals.push_back(qcr_residual(sp, pg.sample(g), ph.sample(g), f).mixed);
      const double ratio = level ? residuals[static_cast<std::size_t>(level)] /
                                       residuals[static_cast<std::size_t>(level - 1)]
                                 : std::nan("");
      table.rows.push_back({static_cast<double>(level), g.max_weight(),
                            residuals.back(), ratio});
      if (level < 2) g = g.split_cells();
    }
    if (std::abs(1.0 + kernel.eta()) < 1e-12 && grid.fiber_dim() == 1) {
      rec.check("mixed_residual_vanishes_for_eta_minus_one", 1e-12, CheckMode::upper,
                [&] { return std::pair{residuals[0], 0.0}; });
    } else {
      for (int i = 1; i <= 2; ++i) {
        rec.check("mixed_residual_halving_ratio_" + std::to_string(i), 0.1, CheckMode::abs, [&] {
          return std::pair{residuals[static_cast<std::size_t>(i)] /
                               residuals[static_cast<std::size_t>(i - 1)],
                           0.5};
        });
      }
    }
    rec.table(std::move(table));
  }

  rec.check("reorder_residual_vacuum", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      worst = std::max(worst, vector_norm(space, reorder_residual(space, random_function(sites, rng),
                                                                  random_function(sites, rng),
                                                                  FockVector::vacuum(sites, n_max))));
    }
    return std::pair{worst, 0.0};
  });
  if (grid.axis_size() >= 2) {
    rec.check("reorder_residual_delta_disjoint", 1e-10, CheckMode::upper, [&] {
      double worst = 0.0;
      for (std::size_t i = 0; i < c.random_cases; ++i) {
        GridFunction h1 = random_function(sites, rng);
        GridFunction h2 = random_function(sites, rng);
        for (std::size_t s = 0; s < sites; ++s) {
          (grid.axis_of(s) % 2 == 0 ? h2 : h1)[s] = 0.0;
        }
        const FockVector f = random_fock(space, n_max, n_max - 1, rng);
        worst = std::max(worst, vector_norm(space, reorder_residual(space, h1, h2, f)));
      }
      return std::pair{worst, 0.0};
    });
  }
  rec.check("reorder_residual_level1_equals_hand_defect", 1e-12, CheckMode::upper, [&] {
    // h1(v) sum_{u~v} h2 w f(u) + eta f(v) sum_{u~v} h1 h2 w
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const GridFunction h1 = random_function(sites, rng);
      const GridFunction h2 = random_function(sites, rng);
      const GridFunction fv = random_function(sites, rng);
      FockVector f(sites, n_max);
      f.level(1) = as_tensor(fv);
      GridFunction hand(sites, 0.0);
      for (std::size_t v = 0; v < sites; ++v) {
        for (std::size_t u = 0; u < sites; ++u) {
          if (!space.delta_related(u, v)) continue;
          hand[v] += h1[v] * h2[u] * space.weight(u) * fv[u] +
                     space.eta() * fv[v] * h1[u] * h2[u] * space.weight(u);
        }
      }
      worst = std::max(worst, level_distance(space, reorder_residual(space, h1, h2, f).level(1), hand));
    }
    return std::pair{worst, 0.0};
  });

  rec.check("intertwining_create", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      for (std::size_t n = 1; n <= 3; ++n) {
        const GridFunction h = random_function(sites, rng);
        const Tensor f = random_tensor(n, sites, rng);
        Tensor lhs = project_qsym(space, b_apply(Sign::plus, space, h, f));
        lhs -= project_qsym(space, outer(as_tensor(h), project_qsym(space, f)));
        worst = std::max(worst, lhs.max_abs());
      }
    }
    return std::pair{worst, 0.0};
  });
  rec.check("intertwining_annihilate", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      for (std::size_t n = 1; n <= 3; ++n) {
        const GridFunction h = random_function(sites, rng);
        Tensor f = random_tensor(n, sites, rng);
        restrict_off_delta(space, f);
        Tensor lhs = n > 1 ? project_qsym(space, b_apply(Sign::minus, space, conjugate(h), f))
                           : b_apply(Sign::minus, space, conjugate(h), f);
        lhs -= annihilate_level(space, h, project_qsym(space, f));
        worst = std::max(worst, lhs.max_abs());
      }
    }
    return std::pair{worst, 0.0};
  });
  rec.check("creation_annihilation_adjoint", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const GridFunction h = random_function(sites, rng);
      const FockVector f = random_fock(space, n_max, n_max - 1, rng);
      const FockVector g = random_fock(space, n_max, n_max, rng);
      worst = std::max(worst, std::abs(fock_inner(space, create(space, h, f), g) -
                                       fock_inner(space, f, annihilate(space, h, g))));
    }
    return std::pair{worst, 0.0};
  });
}

// ---------------------------------------------------------------------------

void run_exclusion(const ExperimentConfig& c, Report& report) {
  Recorder rec("exclusion", report);
  const Grid grid = c.grid.build();
  const QKernel kernel = c.kernel.build();
  const int k = root_order(kernel, static_cast<int>(c.max_level));
  if (k == 0) {
    throw ConfigError("kernel.q_angle",
                      "the exclusion suite needs q to be a nontrivial root of unity of order <= fock.max_level");
  }
  const SiteSpace space = SiteSpace::from_grid(grid, kernel);
  const std::size_t sites = space.size();
  std::mt19937_64 rng(mix_seed(c.seed, "exclusion"));
  const std::string suffix = "_k" + std::to_string(k);

  rec.check("creation_power_vacuum" + suffix, 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      worst = std::max(worst, exclusion_norm(space, random_function(sites, rng), k,
                                             FockVector::vacuum(sites, static_cast<std::size_t>(k))));
    }
    return std::pair{worst, 0.0};
  });
  if (static_cast<std::size_t>(k) + 1 <= c.max_level) {
    rec.check("creation_power_one_particle" + suffix, 1e-10, CheckMode::upper, [&] {
      double worst = 0.0;
      for (std::size_t i = 0; i < c.random_cases; ++i) {
        FockVector f(sites, static_cast<std::size_t>(k) + 1);
        f.level(1) = as_tensor(random_function(sites, rng));
        worst = std::max(worst, exclusion_norm(space, random_function(sites, rng), k, f));
      }
      return std::pair{worst, 0.0};
    });
  }
  const double eta = kernel.eta();
  double kappa = c.model_kappa;
  if (eta < 0.0) kappa = std::min(kappa, std::sqrt(-1.0 / eta));
  const DoubledGrid doubled(grid, kernel);
  const KPair pair = KPair::scalar(grid, kappa, eta);
  rec.check("doubled_creation_power_vacuum" + suffix, 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      worst = std::max(worst, d_power_norm(random_function(grid.site_count(), rng), k, pair, doubled));
    }
    return std::pair{worst, 0.0};
  });

  // P_k 1 on an increasing tuple is [k]_q! / k!.
  const Grid line = Grid::uniform(5, 1, 1.0);
  std::vector<QKernel> kernels{kernel};
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 5; ++i) {
    const double a = angle(rng);
    kernels.emplace_back(cplx(std::cos(a), std::sin(a)));
  }
  rec.check("constant_symmetrization_q_factorial", 1e-12, CheckMode::upper, [&] {
    double worst = 0.0;
    for (const QKernel& kq : kernels) {
      const SiteSpace sp = SiteSpace::from_grid(line, kq);
      for (int order = 1; order <= 5; ++order) {
        Tensor ones(static_cast<std::size_t>(order), sp.size());
        std::fill(ones.data().begin(), ones.data().end(), cplx(1.0));
        const Tensor p = project_qsym(sp, ones);
        std::vector<std::size_t> idx(static_cast<std::size_t>(order));
        for (int j = 0; j < order; ++j) idx[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j);
        worst = std::max(worst, std::abs(p[p.flatten(idx)] - q_factorial_over_factorial(kq.q(), order)));
      }
    }
    return std::pair{worst, 0.0};
  });
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd default_block(std::size_t fiber, double eta) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(fiber),
                                                static_cast<Eigen::Index>(fiber));
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    t(i, i) = 1.0 - 0.5 * static_cast<double>(i) / static_cast<double>(fiber);
    if (i + 1 < t.rows()) t(i, i + 1) = t(i + 1, i) = 0.3;
  }
  if (eta < 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    const double top = solver.eigenvalues().maxCoeff();
    const double cap = -0.9 / eta;
    if (top > cap) t *= cap / top;
  }
  return t;
}

// g_i and h_i supported on the axis cells with index = i (mod n).
void disjoint_smears(const Grid& grid, std::size_t n, std::mt19937_64& rng,
                     std::vector<GridFunction>& gs, std::vector<GridFunction>& hs) {
  gs.assign(n, GridFunction(grid.site_count(), 0.0));
  hs.assign(n, GridFunction(grid.site_count(), 0.0));
  for (std::size_t s = 0; s < grid.site_count(); ++s) {
    const std::size_t i = grid.axis_of(s) % n;
    gs[i][s] = complex_normal(rng);
    hs[i][s] = complex_normal(rng);
  }
}

void run_quasifree(const ExperimentConfig& c, Report& report) {
  Recorder rec("quasifree", report);
  const Grid grid = c.grid.build();
  const QKernel kernel = c.kernel.build();
  const double eta = kernel.eta();
  const double kappa = c.model_kappa;
  if (eta < 0.0 && kappa * kappa > -1.0 / eta) {
    throw ConfigError("model.kappa", "kappa^2 must not exceed -1/eta of the kernel");
  }
  const DoubledGrid doubled(grid, kernel);
  const KPair pair = KPair::scalar(grid, kappa, eta);
  const std::size_t sites = grid.site_count();
  std::mt19937_64 rng(mix_seed(c.seed, "quasifree"));

  // Block T on a grid with at least two fiber states.
  const std::size_t fiber = std::max<std::size_t>(2, grid.fiber_dim());
  const Grid block_grid(grid.coords(), grid.weights(), fiber);
  Eigen::MatrixXd block = default_block(fiber, eta);
  if (!c.t_block.empty()) {
    if (c.t_block.size() != fiber) {
      throw ConfigError("model.t_block", "size must equal max(2, grid.fiber_dim)");
    }
    for (std::size_t i = 0; i < fiber; ++i) {
      for (std::size_t j = 0; j < fiber; ++j) {
        block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.t_block[i][j];
      }
    }
  }
  const DoubledGrid block_doubled(block_grid, kernel);
  const KPair block_pair = KPair::uniform_block(block_grid, block, eta);

  rec.check("k_constraint_residual", 1e-12, CheckMode::upper, [&] {
    return std::pair{std::max(pair.constraint_residual(), block_pair.constraint_residual()), 0.0};
  });
  rec.check("k_commutes_with_axis_multiplication", 1e-12, CheckMode::upper, [&] {
    std::vector<double> psi(grid.axis_size());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : psi) v = u(rng);
    return std::pair{block_pair.multiplication_commutator(psi), 0.0};
  });
  rec.check("d_minus_on_vacuum", 1e-12, CheckMode::upper, [&] {
    const GridFunction h = random_function(sites, rng);
    FockVector v = d_apply(Sign::minus, h, pair, doubled, FockVector::vacuum(2 * sites, 1));
    FockVector expected(2 * sites, 1);
    GridFunction scaled = h;
    for (auto& x : scaled) x *= kappa;
    expected.level(1) = as_tensor(doubled.embed(scaled, 0));
    return std::pair{fock_norm(doubled.space(), v - expected), 0.0};
  });
  rec.check("d_plus_on_vacuum", 1e-12, CheckMode::upper, [&] {
    const GridFunction h = random_function(sites, rng);
    FockVector v = d_apply(Sign::plus, h, pair, doubled, FockVector::vacuum(2 * sites, 1));
    FockVector expected(2 * sites, 1);
    GridFunction scaled = h;
    for (auto& x : scaled) x *= std::sqrt(1.0 + eta * kappa * kappa);
    expected.level(1) = as_tensor(doubled.embed(scaled, 1));
    return std::pair{fock_norm(doubled.space(), v - expected), 0.0};
  });
  rec.check("two_point_word_vs_s11", 1e-12, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const GridFunction g = random_function(sites, rng);
      const GridFunction h = random_function(sites, rng);
      const Word w{{Sign::plus, g}, {Sign::minus, h}};
      worst = std::max(worst, std::abs(tau_vacuum(w, pair, doubled) - s11(g, h, pair, grid)));
    }
    return std::pair{worst, 0.0};
  });
  rec.check("two_point_word_vs_s11_block", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      const GridFunction g = random_function(block_grid.site_count(), rng);
      const GridFunction h = random_function(block_grid.site_count(), rng);
      const Word w{{Sign::plus, g}, {Sign::minus, h}};
      worst = std::max(worst, std::abs(tau_vacuum(w, block_pair, block_doubled) -
                                       s11(g, h, block_pair, block_grid)));
    }
    return std::pair{worst, 0.0};
  });

  for (std::size_t n = 1; n <= 2; ++n) {
    if (n == 2 && grid.axis_size() < 2) break;
    for (int variant = 0; variant < 2; ++variant) {
      const Grid& g = variant ? block_grid : grid;
      const KPair& kp = variant ? block_pair : pair;
      const DoubledGrid& dg = variant ? block_doubled : doubled;
      const std::string name = "npoint_fock_vs_qpermanent_n" + std::to_string(n) +
                               (variant ? "_block" : "_scalar");
      rec.check(name, 1e-10, CheckMode::upper, [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < c.random_cases; ++i) {
          std::vector<GridFunction> gs, hs;
          disjoint_smears(g, n, rng, gs, hs);
          worst = std::max(worst, crosscheck_npoint(gs, hs, kp, dg).residual);
        }
        return std::pair{worst, 0.0};
      });
    }
  }

  // Overlapping smears: the Fock route drops coincident tuples, so the
  // difference is first order in the cell weight.
  {
    const Profile p1 = Profile::random(grid.fiber_dim(), rng);
    const Profile p2 = Profile::random(grid.fiber_dim(), rng);
    const Profile p3 = Profile::random(grid.fiber_dim(), rng);
    const Profile p4 = Profile::random(grid.fiber_dim(), rng);
    Table table{"quasifree_scaling", {"refinement", "max_weight", "residual", "ratio"}, {}};
    std::vector<double> residuals;
    Grid g = grid;
    for (int level = 0; level < 4; ++level) {
      const DoubledGrid dg(g, kernel);
      const KPair kp = KPair::scalar(g, kappa, eta);
      residuals.push_back(crosscheck_npoint({p1.sample(g), p2.sample(g)},
                                            {p3.sample(g), p4.sample(g)}, kp, dg)
                              .residual);
      const double ratio = level ? residuals[static_cast<std::size_t>(level)] /
                                       residuals[static_cast<std::size_t>(level - 1)]
                                 : std::nan("");
      table.rows.push_back({static_cast<double>(level), g.max_weight(), residuals.back(), ratio});
      if (level < 3) g = g.split_cells();
    }
    // The coarsest grid is still pre-asymptotic; judge the two finer halvings.
    for (int i = 2; i <= 3; ++i) {
      rec.check("npoint_overlap_halving_ratio_" + std::to_string(i), 0.1, CheckMode::abs, [&] {
        return std::pair{residuals[static_cast<std::size_t>(i)] /
                             residuals[static_cast<std::size_t>(i - 1)],
                         0.5};
      });
    }
    rec.table(std::move(table));
  }

  // Degenerations on a line of at least three cells.
  const Grid line = Grid::uniform(std::max<std::size_t>(3, grid.axis_size()), 1, grid.total_mass());
  const KPair line_pair_bose = KPair::scalar(line, kappa, 1.0);
  const KPair line_pair_fermi = KPair::scalar(line, std::min(kappa, 1.0), -1.0);
  auto s_matrix = [&](const std::vector<GridFunction>& gs, const std::vector<GridFunction>& hs,
                      const KPair& kp) {
    Eigen::MatrixXcd m(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        m(i, j) = s11(gs[static_cast<std::size_t>(i)], hs[static_cast<std::size_t>(j)], kp, line);
      }
    }
    return m;
  };
  rec.check("qpermanent_bose_equals_permanent", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    const QKernel bose(1.0);
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      std::vector<GridFunction> gs, hs;
      for (int j = 0; j < 3; ++j) {
        gs.push_back(random_function(line.site_count(), rng));
        hs.push_back(random_function(line.site_count(), rng));
      }
      const cplx qp = npoint_qpermanent(gs, hs, line_pair_bose, line, bose);
      worst = std::max(worst, std::abs(qp - permanent(s_matrix(gs, hs, line_pair_bose))));
    }
    return std::pair{worst, 0.0};
  });
  rec.check("qpermanent_fermi_equals_determinant", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    const QKernel fermi(-1.0);
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      std::vector<GridFunction> gs, hs;
      disjoint_smears(line, 3, rng, gs, hs);
      const cplx qp = npoint_qpermanent(gs, hs, line_pair_fermi, line, fermi);
      worst = std::max(worst, std::abs(qp - determinant(s_matrix(gs, hs, line_pair_fermi))));
    }
    return std::pair{worst, 0.0};
  });

  rec.check("gauge_invariance_unbalanced_words", 1e-12, CheckMode::upper, [&] {
    double worst = 0.0;
    const std::vector<std::vector<Sign>> shapes = {
        {Sign::plus},
        {Sign::minus},
        {Sign::plus, Sign::plus},
        {Sign::minus, Sign::minus},
        {Sign::plus, Sign::minus, Sign::minus},
        {Sign::plus, Sign::plus, Sign::plus, Sign::minus}};
    for (const auto& shape : shapes) {
      Word w;
      for (Sign s : shape) w.push_back({s, random_function(sites, rng)});
      worst = std::max(worst, std::abs(tau_vacuum(w, pair, doubled)));
    }
    return std::pair{worst, 0.0};
  });
  rec.check("gram_matrix_min_eigenvalue", 1e-9, CheckMode::lower, [&] {
    std::vector<Word> words;
    for (int i = 0; i < 4; ++i) words.push_back({{Sign::minus, random_function(sites, rng)}});
    for (int i = 0; i < 4; ++i) {
      words.push_back({{Sign::minus, random_function(sites, rng)},
                       {Sign::minus, random_function(sites, rng)}});
    }
    return std::pair{min_eigenvalue(gram_matrix(words, pair, doubled)), 0.0};
  });
}

// ---------------------------------------------------------------------------

void run_density(const ExperimentConfig& c, Report& report) {
  Recorder rec("density", report);
  const Grid grid = c.grid.build();
  const DensityParams p(c.model_eta, c.model_kappa);
  const std::size_t sites = grid.site_count();
  std::mt19937_64 rng(mix_seed(c.seed, "density"));

  rec.check("scale_equals_kappa2_beta", 1e-12, CheckMode::abs,
            [&] { return std::pair{p.scale, p.kappa * p.kappa * p.beta}; });
  rec.check("inverse_beta_identity", 1e-12, CheckMode::abs, [&] {
    return std::pair{2.0 / (p.lambda + std::sqrt(p.lambda * p.lambda - 4.0 * p.eta)), 1.0 / p.beta};
  });
  rec.check("first_moment_closed_form", 1e-12, CheckMode::rel, [&] {
    const RealFunction f = random_real(sites, rng);
    return std::pair{rho_moment({f}, p, grid), p.kappa * p.kappa * weighted_sum(grid, f)};
  });
  rec.check("second_moment_closed_form", 1e-12, CheckMode::rel, [&] {
    const RealFunction f = random_real(sites, rng);
    RealFunction f2(sites);
    for (std::size_t x = 0; x < sites; ++x) f2[x] = f[x] * f[x];
    const double k2 = p.kappa * p.kappa;
    const double m = weighted_sum(grid, f);
    return std::pair{rho_moment({f, f}, p, grid),
                     k2 * (1.0 + p.eta * k2) * weighted_sum(grid, f2) + k2 * k2 * m * m};
  });
  if (p.eta >= 0.0) {
    const LevyModel model = p.eta == 0.0 ? build_levy(LevyKind::poisson, 0.0, p.kappa)
                                         : build_levy(LevyKind::negbin, p.eta, p.kappa);
    for (std::size_t n = 1; n <= 5; ++n) {
      rec.check("rho_vs_exact_moment_n" + std::to_string(n), 1e-9, CheckMode::upper, [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < c.random_cases; ++i) {
          std::vector<RealFunction> fs;
          for (std::size_t j = 0; j < n; ++j) fs.push_back(random_real(sites, rng));
          const double a = rho_moment(fs, p, grid);
          const double b = exact_joint_moment(fs, model, grid);
          worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
        return std::pair{worst, 0.0};
      });
    }
  }
  rec.check("rho_moment_permutation_symmetry", 1e-10, CheckMode::upper, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.random_cases; ++i) {
      std::vector<RealFunction> fs;
      for (int j = 0; j < 4; ++j) fs.push_back(random_real(sites, rng));
      const double base = rho_moment(fs, p, grid);
      std::vector<RealFunction> shuffled = fs;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      worst = std::max(worst, std::abs(rho_moment(shuffled, p, grid) - base) /
                                  std::max(std::abs(base), 1e-300));
    }
    return std::pair{worst, 0.0};
  });
  if (p.eta >= 0.0) {
    rec.check("moment_hankel_min_eigenvalue", 1e-9, CheckMode::lower, [&] {
      const RealFunction f = random_real(sites, rng);
      std::vector<double> m(5);
      for (std::size_t j = 0; j < 5; ++j) m[j] = rho_moment(std::vector<RealFunction>(j, f), p, grid);
      Eigen::Matrix3d h;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) h(i, j) = m[static_cast<std::size_t>(i + j)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(h);
      return std::pair{solver.eigenvalues().minCoeff() / std::max(1.0, h.norm()), 0.0};
    });
  }
  rec.check("positivity_witness_negative_eta", 0.0, CheckMode::abs, [&] {
    const Grid cell({1.0}, {0.5});
    return std::pair{positivity_witness({1.0}, -1.0, cell), -0.5};
  });
  if (p.eta > 0.0) {
    const MeixnerResult mx = meixner_coeffs(p, kMaxMeixnerOrder);
    rec.check("meixner_total_mass", 1e-10, CheckMode::abs, [&] { return std::pair{mx.total_mass, 1.0}; });
    rec.check("meixner_b0", 1e-8, CheckMode::abs, [&] { return std::pair{mx.b[0], p.lambda}; });
    rec.check("meixner_a1", 1e-6, CheckMode::abs, [&] { return std::pair{mx.a[0], 2.0 * p.eta}; });
    Table table{"meixner_coefficients", {"k", "a_k", "a_k_expected", "b_k", "b_k_expected"}, {}};
    for (std::size_t k = 0; k < mx.b.size(); ++k) {
      const double kd = static_cast<double>(k);
      table.rows.push_back({kd, k ? mx.a[k - 1] : std::nan(""), k ? p.eta * kd * (kd + 1.0) : std::nan(""),
                            mx.b[k], p.lambda * (kd + 1.0)});
    }
    rec.table(std::move(table));
  }
}

// ---------------------------------------------------------------------------

void run_pointproc(const ExperimentConfig& c, Report& report) {
  Recorder rec("pointproc", report);
  const Grid grid = c.grid.build();
  const double eta = c.model_eta;
  const double kappa = c.model_kappa;
  const std::size_t cells = grid.site_count();
  const unsigned threads = c.parallel ? std::max(1u, c.threads) : c.threads;
  std::mt19937_64 rng(mix_seed(c.seed, "pointproc"));
  const std::uint64_t sample_seed = mix_seed(c.seed, "pointproc-samples");

  std::vector<LevyModel> models{build_levy(LevyKind::poisson, eta, kappa)};
  if (eta > 0.0) {
    models.push_back(build_levy(LevyKind::negbin, eta, kappa));
    models.push_back(build_levy(LevyKind::gamma, eta, kappa));
  }

  rec.check("determinism_same_seed", 0.0, CheckMode::abs, [&] {
    double worst = 0.0;
    for (const auto& m : models) {
      const auto a = sample(grid, m, sample_seed, 7);
      const auto b = sample(grid, m, sample_seed, 7);
      for (std::size_t x = 0; x < cells; ++x) worst = std::max(worst, std::abs(a.masses[x] - b.masses[x]));
    }
    return std::pair{worst, 0.0};
  });

  for (const auto& model : models) {
    const std::string kind = to_string(model.kind);
    const SampleMatrix samples = sample_replicates(grid, model, sample_seed, c.samples, threads);

    for (std::size_t x = 0; x < cells; ++x) {
      const double w = grid.site_weight(x);
      const MomentEstimate mean = empirical_joint_moment(
          {[&] { RealFunction e(cells, 0.0); e[x] = 1.0; return e; }()}, samples, grid);
      const double expected = model.kind == LevyKind::gamma ? w / std::sqrt(eta) : kappa * kappa * w;
      rec.check(kind + "_cell" + std::to_string(x) + "_mean", 4.0 * mean.std_error, CheckMode::abs,
                [&] { return std::pair{mean.mean, expected}; });
    }
    if (cells >= 2) {
      const MomentEstimate cov = empirical_covariance(samples, 0, 1);
      rec.check(kind + "_disjoint_cell_covariance", 4.0 * cov.std_error, CheckMode::abs,
                [&] { return std::pair{cov.mean, 0.0}; });
    }
    for (std::size_t n = 1; n <= 4; ++n) {
      const RealFunction f = random_real(cells, rng);
      const std::vector<RealFunction> fs(n, f);
      const MomentEstimate est = empirical_joint_moment(fs, samples, grid);
      const double exact = exact_joint_moment(fs, model, grid);
      rec.check(kind + "_moment_n" + std::to_string(n) + "_vs_exact", 4.0 * est.std_error,
                CheckMode::abs, [&] { return std::pair{est.mean, exact}; });
    }

    if (model.kind == LevyKind::negbin) {
      rec.check("negbin_first_atom_mass", 1e-15, CheckMode::rel,
                [&] { return std::pair{model.atoms[0].mass, model.p / eta}; });
      rec.check("negbin_levy_mean_equals_kappa2", 1e-12, CheckMode::rel,
                [&] { return std::pair{levy_moment(model, 1), kappa * kappa}; });
      const SampleMatrix direct =
          sample_replicates(grid, model, mix_seed(sample_seed, "direct"), c.samples, threads,
                            NegbinRoute::direct);
      for (std::size_t x = 0; x < cells; ++x) {
        const double w = grid.site_weight(x);
        const auto emp = empirical_pmf(samples, x);
        rec.check("negbin_cell" + std::to_string(x) + "_tv_vs_pmf", 0.01, CheckMode::upper,
                  [&] { return std::pair{negbin_tv_distance(emp, w, eta, kappa), 0.0}; });
        rec.check("negbin_cell" + std::to_string(x) + "_tv_compound_vs_direct", 0.01,
                  CheckMode::upper,
                  [&] { return std::pair{tv_distance(emp, empirical_pmf(direct, x)), 0.0}; });
        if (x == 0) {
          Table table{"negbin_pmf", {"k", "empirical", "exact"}, {}};
          for (std::size_t k = 0; k < emp.size(); ++k) {
            table.rows.push_back({static_cast<double>(k), emp[k],
                                  negbin_pmf(static_cast<long>(k), w, eta, kappa)});
          }
          rec.table(std::move(table));
        }
      }
    }

    // Laplace transform: f = 0, then f = -t on cell 0.
    rec.check(kind + "_laplace_zero", 0.0, CheckMode::abs, [&] {
      const LaplaceCheck lc = laplace_check(RealFunction(cells, 0.0), model, grid, 1000, sample_seed, 1);
      return std::pair{lc.empirical, lc.exact};
    });
    {
      RealFunction f(cells, 0.0);
      f[0] = model.kind == LevyKind::gamma ? -0.7 : -1.0;
      const LaplaceCheck lc = laplace_check(f, model, grid, c.samples, mix_seed(sample_seed, "laplace"), threads);
      rec.check(kind + "_laplace_one_cell", 4.0 * lc.std_error, CheckMode::abs,
                [&] { return std::pair{lc.empirical, lc.exact}; });
      if (model.kind == LevyKind::gamma) {
        const double w = grid.site_weight(0);
        rec.check("gamma_laplace_closed_form", 1e-14, CheckMode::rel, [&] {
          return std::pair{lc.exact, std::pow(1.0 + std::sqrt(eta) * 0.7, -w / eta)};
        });
      }
    }
  }
}

// ---------------------------------------------------------------------------

void run_gamma_limit(const ExperimentConfig& c, Report& report) {
  Recorder rec("gamma-limit", report);
  const double eta = c.model_eta;
  if (!(eta > 0.0)) throw ConfigError("model.eta", "the gamma-limit suite needs eta > 0");
  const Grid grid = c.grid.build();
  std::mt19937_64 rng(mix_seed(c.seed, "gamma-limit"));
  const RealFunction f = random_real(grid.site_count(), rng);
  Table table{"kappa_sweep", {"n", "kappa", "tau", "gamma_moment", "gap"}, {}};
  for (int n = 1; n <= 3; ++n) {
    const GammaLimitTable t = gamma_limit_check(f, eta, n, c.kappas, grid);
    for (const auto& row : t.rows) {
      table.rows.push_back({static_cast<double>(n), row.kappa, row.tau, row.gamma_moment, row.gap});
    }
    const std::string suffix = "_n" + std::to_string(n);
    rec.check("gap_strictly_decreasing" + suffix, 0.0, CheckMode::abs,
              [&] { return std::pair{t.strictly_decreasing ? 1.0 : 0.0, 1.0}; });
    rec.check("final_relative_gap" + suffix, 0.01, CheckMode::upper, [&] {
      const auto& last = t.rows.back();
      return std::pair{last.gap / std::abs(last.gamma_moment), 0.0};
    });
  }
  rec.table(std::move(table));

  const LevyModel gamma = build_levy(LevyKind::gamma, eta, 1.0);
  RealFunction g(grid.site_count(), 0.0);
  const double t = 0.7;
  g[0] = -t;
  const unsigned threads = c.parallel ? std::max(1u, c.threads) : c.threads;
  const LaplaceCheck lc = laplace_check(g, gamma, grid, c.samples, mix_seed(c.seed, "gamma-laplace"), threads);
  rec.check("gamma_laplace_vs_closed_form", 4.0 * lc.std_error, CheckMode::abs, [&] {
    return std::pair{lc.empirical, std::pow(1.0 + std::sqrt(eta) * t, -grid.site_weight(0) / eta)};
  });
}

using SuiteFn = void (*)(const ExperimentConfig&, Report&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"qcr", run_qcr},           {"exclusion", run_exclusion}, {"quasifree", run_quasifree},
      {"density", run_density},   {"pointproc", run_pointproc}, {"gamma-limit", run_gamma_limit}};
  return table;
}

}  // namespace

Report run_suite(const ExperimentConfig& config) {
  validate(config);
  set_tensor_entry_cap(config.entry_cap);
  Report report;
  report.suite = config.suite;
  report.config = config_to_json(config);
  if (config.suite != "all") {
    for (const auto& [name, fn] : suite_table()) {
      if (name == config.suite) fn(config, report);
    }
    return report;
  }
  if (!config.parallel) {
    for (const auto& [name, fn] : suite_table()) fn(config, report);
    return report;
  }
  // Independent suites in parallel, merged in the fixed suite order.
  std::vector<std::future<Report>> parts;
  for (const auto& entry : suite_table()) {
    const SuiteFn fn = entry.second;
    parts.push_back(std::async(std::launch::async, [fn, &config] {
      Report part;
      fn(config, part);
      return part;
    }));
  }
  for (auto& part : parts) report.append(part.get());
  return report;
}

}  // namespace anyonfock
