#include "anyonfock/density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "anyonfock/pointproc.hpp"

namespace anyonfock {

namespace {

void check_smear(const RealFunction& phi, std::size_t sites, const char* where) {
  if (phi.size() != sites) {
    std::ostringstream msg;
    msg << where << ": smear has " << phi.size() << " values, expected " << sites;
    throw std::invalid_argument(msg.str());
  }
}

double weighted_mass(const RealFunction& phi, const Grid& grid) {
  double s = 0.0;
  for (std::size_t x = 0; x < phi.size(); ++x) s += phi[x] * grid.site_weight(x);
  return s;
}

// Index of the tuple idx with slot `skip` removed, as a flat index of order
// idx.size() - 1.
std::size_t flat_without(std::span<const std::size_t> idx, std::size_t skip,
                         std::size_t sites) {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k != skip) flat = flat * sites + idx[k];
  }
  return flat;
}

RealTensor apply_level(JacobiPart part, const RealFunction& phi, const RealTensor& f,
                       const Grid& grid) {
  const std::size_t n = f.order();
  const std::size_t sites = f.sites();
  switch (part) {
    case JacobiPart::create: {
      RealTensor out(n + 1, sites);
      std::vector<std::size_t> idx(n + 1);
      const double norm = 1.0 / static_cast<double>(n + 1);
      for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out.unflatten(flat, idx);
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
          acc += phi[idx[i]] * f[flat_without(idx, i, sites)];
        }
        out[flat] = acc * norm;
      }
      return out;
    }
    case JacobiPart::neutral: {
      RealTensor out(n, sites);
      std::vector<std::size_t> idx(n);
      for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out.unflatten(flat, idx);
        double s = 0.0;
        for (std::size_t x : idx) s += phi[x];
        out[flat] = s * f[flat];
      }
      return out;
    }
    case JacobiPart::annih1: {
      RealTensor out(n - 1, sites);
      const std::size_t block = out.size();
      for (std::size_t y = 0; y < sites; ++y) {
        const double c = static_cast<double>(n) * phi[y] * grid.site_weight(y);
        if (c == 0.0) continue;
        for (std::size_t k = 0; k < block; ++k) out[k] += c * f[y * block + k];
      }
      return out;
    }
    case JacobiPart::annih2: {
      RealTensor out(n - 1, sites);
      std::vector<std::size_t> idx(n - 1), src(n);
      for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out.unflatten(flat, idx);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          // slot i doubled, rest in order
          src[0] = idx[i];
          src[1] = idx[i];
          std::size_t k = 2;
          for (std::size_t j = 0; j + 1 < n; ++j) {
            if (j != i) src[k++] = idx[j];
          }
          acc += phi[idx[i]] * f[f.flatten(src)];
        }
        out[flat] = static_cast<double>(n) * acc;
      }
      return out;
    }
  }
  throw std::logic_error("unknown Jacobi part");
}

// Parts that raise the level drop content above max_level.
SymFock apply_part(JacobiPart part, const RealFunction& phi, const SymFock& f,
                   const Grid& grid) {
  SymFock out(f.site_count(), f.max_level());
  for (std::size_t n = 0; n <= f.max_level(); ++n) {
    const RealTensor& level = f.level(n);
    if (level.is_zero()) continue;
    switch (part) {
      case JacobiPart::create:
        if (n < f.max_level()) out.level(n + 1) += apply_level(part, phi, level, grid);
        break;
      case JacobiPart::neutral:
        if (n >= 1) out.level(n) += apply_level(part, phi, level, grid);
        break;
      case JacobiPart::annih1:
        if (n >= 1) out.level(n - 1) += apply_level(part, phi, level, grid);
        break;
      case JacobiPart::annih2:
        if (n >= 2) out.level(n - 1) += apply_level(part, phi, level, grid);
        break;
    }
  }
  return out;
}

SymFock rhat_truncating(const RealFunction& phi, const SymFock& f,
                        const DensityParams& p, const Grid& grid) {
  SymFock out = apply_part(JacobiPart::create, phi, f, grid);
  SymFock part = apply_part(JacobiPart::neutral, phi, f, grid);
  part *= p.lambda;
  out += part;
  out += apply_part(JacobiPart::annih1, phi, f, grid);
  if (p.eta != 0.0) {
    part = apply_part(JacobiPart::annih2, phi, f, grid);
    part *= p.eta;
    out += part;
  }
  SymFock constant = f;
  constant *= weighted_mass(phi, grid) / p.beta;
  out += constant;
  return out;
}

void require_headroom(const SymFock& f, const char* where) {
  const int top = f.top_level();
  if (top >= 0 && static_cast<std::size_t>(top) >= f.max_level()) {
    std::ostringstream msg;
    msg << where << ": no free level above level " << top;
    throw HeadroomError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

DensityParams::DensityParams(double eta_, double kappa_) : eta(eta_), kappa(kappa_) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("DensityParams: kappa must be positive");
  }
  if (!std::isfinite(eta)) throw std::invalid_argument("DensityParams: eta must be finite");
  if (eta < 0.0 && !(kappa * kappa < 1.0 / -eta)) {
    throw std::invalid_argument("DensityParams: eta < 0 requires kappa^2 < 1/|eta|");
  }
  beta = std::sqrt(eta + 1.0 / (kappa * kappa));
  lambda = beta + eta / beta;
  scale = kappa * std::sqrt(1.0 + eta * kappa * kappa);
}

SymFock::SymFock(std::size_t site_count, std::size_t max_level) : sites_(site_count) {
  if (site_count == 0) throw std::invalid_argument("SymFock: no sites");
  levels_.reserve(max_level + 1);
  for (std::size_t n = 0; n <= max_level; ++n) levels_.emplace_back(n, site_count);
}

SymFock SymFock::vacuum(std::size_t site_count, std::size_t max_level) {
  SymFock v(site_count, max_level);
  v.levels_[0][0] = 1.0;
  return v;
}

int SymFock::top_level() const {
  for (std::size_t n = levels_.size(); n-- > 0;) {
    if (!levels_[n].is_zero()) return static_cast<int>(n);
  }
  return -1;
}

SymFock& SymFock::operator+=(const SymFock& other) {
  if (other.sites_ != sites_ || other.levels_.size() != levels_.size()) {
    throw std::invalid_argument("SymFock: shape mismatch");
  }
  for (std::size_t n = 0; n < levels_.size(); ++n) levels_[n] += other.levels_[n];
  return *this;
}

SymFock& SymFock::operator*=(double factor) {
  for (auto& level : levels_) level *= factor;
  return *this;
}

RealTensor sym_product(const std::vector<RealFunction>& factors) {
  if (factors.empty()) {
    RealTensor t(0, 1);
    t[0] = 1.0;
    return t;
  }
  const std::size_t n = factors.size();
  const std::size_t sites = factors[0].size();
  for (const auto& f : factors) check_smear(f, sites, "sym_product");
  const auto perms = all_permutations(static_cast<int>(n));
  RealTensor out(n, sites);
  std::vector<std::size_t> idx(n);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.unflatten(flat, idx);
    double acc = 0.0;
    for (const auto& pi : perms) {
      double term = 1.0;
      for (std::size_t i = 0; i < n; ++i) term *= factors[static_cast<std::size_t>(pi[i])][idx[i]];
      acc += term;
    }
    out[flat] = acc / static_cast<double>(perms.size());
  }
  return out;
}

double symmetry_defect(const RealTensor& t) {
  double worst = 0.0;
  std::vector<std::size_t> idx(t.order());
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    t.unflatten(flat, idx);
    for (std::size_t i = 0; i + 1 < t.order(); ++i) {
      std::swap(idx[i], idx[i + 1]);
      worst = std::max(worst, std::abs(t[flat] - t[t.flatten(idx)]));
      std::swap(idx[i], idx[i + 1]);
    }
  }
  return worst;
}

SymFock jacobi_apply(JacobiPart part, const RealFunction& phi, const SymFock& f,
                     const Grid& grid) {
  check_smear(phi, grid.site_count(), "jacobi_apply");
  if (f.site_count() != grid.site_count()) {
    throw std::invalid_argument("jacobi_apply: Fock vector does not match the grid");
  }
  if (part == JacobiPart::create) require_headroom(f, "jacobi_apply");
  return apply_part(part, phi, f, grid);
}

SymFock rhat_apply(const RealFunction& phi, const SymFock& f, const DensityParams& p,
                   const Grid& grid) {
  check_smear(phi, grid.site_count(), "rhat_apply");
  if (f.site_count() != grid.site_count()) {
    throw std::invalid_argument("rhat_apply: Fock vector does not match the grid");
  }
  require_headroom(f, "rhat_apply");
  return rhat_truncating(phi, f, p, grid);
}

double tau_moment(const std::vector<RealFunction>& fs, const DensityParams& p,
                  const Grid& grid) {
  const std::size_t n = fs.size();
  if (n > kMaxDensityMomentOrder) {
    std::ostringstream msg;
    msg << "rho_moment: n = " << n << " exceeds " << kMaxDensityMomentOrder;
    throw std::invalid_argument(msg.str());
  }
  for (const auto& f : fs) check_smear(f, grid.site_count(), "rho_moment");
  if (n == 0) return 1.0;
  // With i factors left only levels <= i can still reach the vacuum; the
  // level reached after k steps is at most min(k, n - k) <= n / 2.
  const std::size_t top = (n + 1) / 2;
  SymFock v = SymFock::vacuum(grid.site_count(), top);
  for (std::size_t i = n; i-- > 0;) {
    v = rhat_truncating(fs[i], v, p, grid);
    for (std::size_t l = i + 1; l <= v.max_level(); ++l) {
      auto& data = v.level(l).data();
      std::fill(data.begin(), data.end(), 0.0);
    }
  }
  return v.level(0)[0];
}

double rho_moment(const std::vector<RealFunction>& fs, const DensityParams& p,
                  const Grid& grid) {
  return std::pow(p.scale, static_cast<double>(fs.size())) * tau_moment(fs, p, grid);
}

double positivity_witness(const RealFunction& f, double eta, const Grid& grid) {
  check_smear(f, grid.site_count(), "positivity_witness");
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double f2 = f[x] * f[x];
    s2 += f2 * grid.site_weight(x);
    s4 += f2 * f2 * grid.site_weight(x);
  }
  return 2.0 * s2 * s2 + 2.0 * eta * s4;
}

// ---------------------------------------------------------------------------

void chebyshev_algorithm(const std::vector<long double>& moments,
                         std::vector<long double>& alpha,
                         std::vector<long double>& beta) {
  if (moments.size() < 2 || moments.size() % 2 != 0) {
    throw std::invalid_argument("chebyshev_algorithm: need an even number >= 2 of moments");
  }
  const std::size_t n = moments.size() / 2;
  alpha.assign(n, 0.0L);
  beta.assign(n, 0.0L);
  const std::size_t width = 2 * n;
  std::vector<long double> prev(width, 0.0L);  // sigma_{k-2}
  std::vector<long double> cur(moments);       // sigma_{k-1}
  alpha[0] = moments[1] / moments[0];
  beta[0] = moments[0];
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<long double> next(width, 0.0L);
    for (std::size_t l = k; l + k < width; ++l) {
      next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta[k - 1] * prev[l];
    }
    if (next[k] == 0.0L) throw std::domain_error("chebyshev_algorithm: singular moment sequence");
    alpha[k] = next[k + 1] / next[k] - cur[k] / cur[k - 1];
    beta[k] = next[k] / cur[k - 1];
    prev = std::move(cur);
    cur = std::move(next);
  }
}

MeixnerResult meixner_coeffs(const DensityParams& p, int kmax) {
  if (!(p.eta > 0.0)) throw std::invalid_argument("meixner_coeffs: eta must be positive");
  if (kmax < 1 || kmax > kMaxMeixnerOrder) {
    std::ostringstream msg;
    msg << "meixner_coeffs: kmax must be in 1.." << kMaxMeixnerOrder;
    throw std::invalid_argument(msg.str());
  }
  const int nmom = 2 * kmax + 2;  // mu_0 .. mu_{2 kmax + 1}
  const long double eta = p.eta;
  const long double beta = p.beta;
  const long double kappa2 = static_cast<long double>(p.kappa) * p.kappa;
  const long double ratio = eta / (beta * beta);
  const long double unit = 1.0L / (kappa2 * beta);

  std::vector<long double> mu(static_cast<std::size_t>(nmom), 0.0L);
  MeixnerResult result;
  long double geometric = 1.0L;
  for (long k = 1;; ++k) {
    geometric *= ratio;
    const long double s = unit * static_cast<long double>(k);
    // zeta'({s_k}) = s_k^2 (1/eta) ratio^k / k
    const long double mass = s * s * geometric / (eta * static_cast<long double>(k));
    long double power = mass;
    for (int j = 0; j < nmom; ++j) {
      mu[static_cast<std::size_t>(j)] += power;
      power *= s;
    }
    result.atoms_used = static_cast<std::size_t>(k);
    // Past the peak of the highest moment the terms decay geometrically.
    const long double high = power / s;
    const long double next_ratio =
        ratio * std::pow(static_cast<long double>(k + 1) / static_cast<long double>(k), nmom);
    if (next_ratio < 1.0L && high <= kLevyTailTolerance * 1e-2L * mu.back()) {
      result.truncated_mass = static_cast<double>(mass * ratio / (1.0L - ratio));
      break;
    }
    if (k > 100'000'000) throw std::domain_error("meixner_coeffs: atom series does not converge");
  }
  result.total_mass = static_cast<double>(mu[0]);

  const int size = kmax + 1;
  Eigen::MatrixXd hankel(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) hankel(i, j) = static_cast<double>(mu[static_cast<std::size_t>(i + j)]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(hankel);
  const auto& sv = svd.singularValues();
  result.hankel_condition = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(result.hankel_condition) || result.hankel_condition > kMaxHankelCondition) {
    std::ostringstream msg;
    msg << "meixner_coeffs: Hankel matrix is numerically singular (condition number "
        << result.hankel_condition << ")";
    throw std::domain_error(msg.str());
  }

  std::vector<long double> alpha, beta_rec;
  chebyshev_algorithm(mu, alpha, beta_rec);
  for (int k = 0; k <= kmax; ++k) result.b.push_back(static_cast<double>(alpha[static_cast<std::size_t>(k)]));
  for (int k = 1; k <= kmax; ++k) result.a.push_back(static_cast<double>(beta_rec[static_cast<std::size_t>(k)]));
  return result;
}

GammaLimitTable gamma_limit_check(const RealFunction& f, double eta, int n,
                                  const std::vector<double>& kappas, const Grid& grid) {
  if (!(eta > 0.0)) throw std::invalid_argument("gamma_limit_check: eta must be positive");
  if (n < 1 || n > 4) throw std::invalid_argument("gamma_limit_check: n must be in 1..4");
  check_smear(f, grid.site_count(), "gamma_limit_check");
  const std::vector<RealFunction> fs(static_cast<std::size_t>(n), f);
  const double gamma = exact_joint_moment(fs, build_levy(LevyKind::gamma, eta, 1.0), grid);
  GammaLimitTable table;
  for (double kappa : kappas) {
    GammaLimitRow row;
    row.kappa = kappa;
    row.tau = tau_moment(fs, DensityParams(eta, kappa), grid);
    row.gamma_moment = gamma;
    row.gap = std::abs(row.tau - gamma);
    table.rows.push_back(row);
  }
  table.strictly_decreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (!(table.rows[i].gap < table.rows[i - 1].gap)) table.strictly_decreasing = false;
  }
  return table;
}

}  // namespace anyonfock
