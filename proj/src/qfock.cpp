#include "anyonfock/qfock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anyonfock {

namespace {

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

void check_function(const SiteSpace& space, const GridFunction& h,
                    const char* where) {
  if (h.size() != space.size()) {
    std::ostringstream msg;
    msg << where << ": smear has " << h.size() << " values, expected "
        << space.size();
    throw std::invalid_argument(msg.str());
  }
}

void check_vector(const SiteSpace& space, const FockVector& f,
                  const char* where) {
  if (f.site_count() != space.size()) {
    std::ostringstream msg;
    msg << where << ": Fock vector lives on " << f.site_count()
        << " sites, expected " << space.size();
    throw std::invalid_argument(msg.str());
  }
}

bool touches_delta(const SiteSpace& space, std::span<const std::size_t> idx) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (space.delta_related(idx[i], idx[j])) return true;
    }
  }
  return false;
}

double tuple_weight(const SiteSpace& space, std::span<const std::size_t> idx) {
  double w = 1.0;
  for (std::size_t s : idx) w *= space.weight(s);
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------

SiteSpace SiteSpace::from_grid(const Grid& grid, const QKernel& kernel) {
  const std::size_t n = grid.site_count();
  std::vector<std::size_t> axis(n);
  std::vector<double> weights(n);
  std::vector<cplx> twist(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    axis[a] = grid.axis_of(a);
    weights[a] = grid.site_weight(a);
    for (std::size_t b = 0; b < n; ++b) {
      twist[a * n + b] = kernel(grid.site_coord(a), grid.site_coord(b));
    }
  }
  return SiteSpace(std::move(axis), std::move(weights), std::move(twist), kernel);
}

SiteSpace::SiteSpace(std::vector<std::size_t> axis_index,
                     std::vector<double> weights, std::vector<cplx> twist,
                     QKernel kernel)
    : axis_(std::move(axis_index)),
      weights_(std::move(weights)),
      twist_(std::move(twist)),
      kernel_(kernel) {
  if (weights_.empty()) throw std::invalid_argument("SiteSpace: no sites");
  if (axis_.size() != weights_.size()) {
    throw std::invalid_argument("SiteSpace: axis index and weights differ in length");
  }
  if (twist_.size() != weights_.size() * weights_.size()) {
    throw std::invalid_argument("SiteSpace: twist matrix has the wrong size");
  }
  for (double w : weights_) {
    if (!(w > 0.0)) throw std::invalid_argument("SiteSpace: weights must be positive");
  }
}

double SiteSpace::max_weight() const {
  return *std::max_element(weights_.begin(), weights_.end());
}

GridFunction SiteSpace::site_indicator(std::size_t s) const {
  GridFunction e(size(), 0.0);
  e.at(s) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------

FockVector::FockVector(std::size_t site_count, std::size_t max_level)
    : sites_(site_count) {
  if (site_count == 0) throw std::invalid_argument("FockVector: no sites");
  levels_.reserve(max_level + 1);
  for (std::size_t n = 0; n <= max_level; ++n) levels_.emplace_back(n, site_count);
}

FockVector FockVector::vacuum(std::size_t site_count, std::size_t max_level) {
  FockVector v(site_count, max_level);
  v.levels_[0][0] = 1.0;
  return v;
}

int FockVector::top_level() const {
  for (std::size_t n = levels_.size(); n-- > 0;) {
    if (!levels_[n].is_zero()) return static_cast<int>(n);
  }
  return -1;
}

FockVector& FockVector::operator+=(const FockVector& other) {
  if (other.sites_ != sites_ || other.levels_.size() != levels_.size()) {
    throw std::invalid_argument("FockVector: shape mismatch");
  }
  for (std::size_t n = 0; n < levels_.size(); ++n) levels_[n] += other.levels_[n];
  truncated_ = truncated_ || other.truncated_;
  return *this;
}

FockVector& FockVector::operator-=(const FockVector& other) {
  if (other.sites_ != sites_ || other.levels_.size() != levels_.size()) {
    throw std::invalid_argument("FockVector: shape mismatch");
  }
  for (std::size_t n = 0; n < levels_.size(); ++n) levels_[n] -= other.levels_[n];
  truncated_ = truncated_ || other.truncated_;
  return *this;
}

FockVector& FockVector::operator*=(cplx factor) {
  for (auto& level : levels_) level *= factor;
  return *this;
}

FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
FockVector operator*(cplx factor, FockVector a) { return a *= factor; }

// ---------------------------------------------------------------------------

cplx level_pairing(const SiteSpace& space, const Tensor& f, const Tensor& g) {
  if (f.order() != g.order() || f.sites() != g.sites() || f.sites() != space.size()) {
    throw std::invalid_argument("level_pairing: shape mismatch");
  }
  std::vector<std::size_t> idx(f.order());
  cplx total = 0.0;
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    if (f[flat] == cplx{} || g[flat] == cplx{}) continue;
    f.unflatten(flat, idx);
    total += f[flat] * std::conj(g[flat]) * tuple_weight(space, idx);
  }
  return total;
}

cplx fock_inner(const SiteSpace& space, const FockVector& f, const FockVector& g) {
  check_vector(space, f, "fock_inner");
  check_vector(space, g, "fock_inner");
  const std::size_t top = std::min(f.max_level(), g.max_level());
  cplx total = 0.0;
  for (std::size_t n = 0; n <= top; ++n) {
    total += factorial(n) * level_pairing(space, f.level(n), g.level(n));
  }
  return total;
}

double fock_norm(const SiteSpace& space, const FockVector& f) {
  return std::sqrt(std::max(0.0, fock_inner(space, f, f).real()));
}

// ---------------------------------------------------------------------------

void restrict_off_delta(const SiteSpace& space, Tensor& tensor) {
  std::vector<std::size_t> idx(tensor.order());
  for (std::size_t flat = 0; flat < tensor.size(); ++flat) {
    tensor.unflatten(flat, idx);
    if (touches_delta(space, idx)) tensor[flat] = 0.0;
  }
}

Tensor project_qsym(const SiteSpace& space, const Tensor& tensor,
                    std::size_t factorial_cap) {
  const std::size_t n = tensor.order();
  if (n == 0) throw std::invalid_argument("project_qsym: order must be >= 1");
  if (tensor.sites() != space.size()) {
    throw std::invalid_argument("project_qsym: tensor dimension does not match the site space");
  }
  if (n > factorial_cap) {
    std::ostringstream msg;
    msg << "project_qsym: order " << n << " exceeds the factorial cap " << factorial_cap;
    throw std::invalid_argument(msg.str());
  }
  const auto perms = all_permutations(static_cast<int>(n));
  std::vector<Permutation> invs;
  invs.reserve(perms.size());
  for (const auto& p : perms) invs.push_back(inverse(p));
  const double norm = 1.0 / factorial(n);

  Tensor out(n, tensor.sites());
  std::vector<std::size_t> idx(n), src(n);
  for (std::size_t flat = 0; flat < tensor.size(); ++flat) {
    tensor.unflatten(flat, idx);
    if (touches_delta(space, idx)) continue;
    cplx acc = 0.0;
    for (std::size_t r = 0; r < perms.size(); ++r) {
      const Permutation& pi = perms[r];
      cplx weight = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (pi[i] > pi[j]) weight *= space.twist(idx[i], idx[j]);
        }
      }
      for (std::size_t k = 0; k < n; ++k) src[k] = idx[static_cast<std::size_t>(invs[r][k])];
      acc += weight * tensor[tensor.flatten(src)];
    }
    out[flat] = acc * norm;
  }
  return out;
}

// ---------------------------------------------------------------------------

FockVector create(const SiteSpace& space, const GridFunction& h,
                  const FockVector& f) {
  check_function(space, h, "create");
  check_vector(space, f, "create");
  FockVector out(f.site_count(), f.max_level());
  if (f.truncated()) out.mark_truncated();
  const Tensor ht = as_tensor(h);
  for (std::size_t n = 0; n <= f.max_level(); ++n) {
    const Tensor& level = f.level(n);
    if (level.is_zero()) continue;
    if (n == f.max_level()) {
      out.mark_truncated();
      continue;
    }
    out.level(n + 1) = project_qsym(space, outer(ht, level));
  }
  return out;
}

Tensor annihilate_level(const SiteSpace& space, const GridFunction& h,
                        const Tensor& f) {
  check_function(space, h, "annihilate");
  const std::size_t n = f.order();
  if (n == 0) throw std::invalid_argument("annihilate: level 0 has no argument");
  const std::size_t sites = f.sites();
  Tensor out(n - 1, sites);
  const std::size_t block = out.size();
  for (std::size_t y = 0; y < sites; ++y) {
    const cplx c = static_cast<double>(n) * std::conj(h[y]) * space.weight(y);
    if (c == cplx{}) continue;
    const std::size_t base = y * block;
    for (std::size_t k = 0; k < block; ++k) out[k] += c * f[base + k];
  }
  return out;
}

FockVector annihilate(const SiteSpace& space, const GridFunction& h,
                      const FockVector& f) {
  check_function(space, h, "annihilate");
  check_vector(space, f, "annihilate");
  FockVector out(f.site_count(), f.max_level());
  if (f.truncated()) out.mark_truncated();
  for (std::size_t n = 1; n <= f.max_level(); ++n) {
    const Tensor& level = f.level(n);
    if (level.is_zero()) continue;
    out.level(n - 1) = annihilate_level(space, h, level);
  }
  return out;
}

Tensor b_apply(Sign sign, const SiteSpace& space, const GridFunction& h,
               const Tensor& f) {
  check_function(space, h, "b_apply");
  if (f.sites() != space.size()) {
    throw std::invalid_argument("b_apply: tensor dimension does not match the site space");
  }
  if (sign == Sign::plus) return outer(as_tensor(h), f);

  const std::size_t n = f.order();
  if (n == 0) throw std::invalid_argument("b_apply: level 0 has no argument");
  Tensor out(n - 1, f.sites());
  std::vector<std::size_t> idx(n - 1), src(n);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.unflatten(flat, idx);
    cplx acc = 0.0;
    for (std::size_t y = 0; y < space.size(); ++y) {
      const cplx hy = h[y] * space.weight(y);
      if (hy == cplx{}) continue;
      cplx running = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        // y sits at slot i; the arguments before it contribute Q(y, x_j).
        for (std::size_t k = 0; k < i; ++k) src[k] = idx[k];
        src[i] = y;
        for (std::size_t k = i; k + 1 < n; ++k) src[k + 1] = idx[k];
        acc += hy * running * f[f.flatten(src)];
        if (i + 1 < n) running *= space.twist(y, idx[i]);
      }
    }
    out[flat] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_headroom(const FockVector& f, std::size_t needed, const char* where) {
  const int top = f.top_level();
  if (top >= 0 && static_cast<std::size_t>(top) + needed > f.max_level()) {
    std::ostringstream msg;
    msg << where << ": needs " << needed << " free levels above level " << top
        << " but max_level is " << f.max_level();
    throw HeadroomError(msg.str());
  }
}

}  // namespace

QcrTerms qcr_terms(const SiteSpace& space, const GridFunction& g,
                   const GridFunction& h, const FockVector& f) {
  check_function(space, g, "qcr_terms");
  check_function(space, h, "qcr_terms");
  check_vector(space, f, "qcr_terms");
  require_headroom(f, 2, "qcr_terms");
  const std::size_t sites = space.size();

  // (i): a+(g)a+(h)F - sum_y h(y) a+(e_y) a+(g_y) F, g_y(x) = g(x)Q(y,x).
  FockVector first = create(space, g, create(space, h, f));
  // (ii): a-(g)a-(h)F - sum_y conj(h(y)) a-(e_y) a-(g~_y) F,
  // g~_y(x) = g(x) conj(Q(y,x)).
  FockVector second = annihilate(space, g, annihilate(space, h, f));
  // (iii): a-(g)a+(h)F - <g,h>F - sum_y h(y) a+(e_y) a-(g^_y) F,
  // g^_y(x) = g(x) conj(Q(x,y)).
  FockVector third = annihilate(space, g, create(space, h, f));
  cplx gh = 0.0;
  for (std::size_t x = 0; x < sites; ++x) gh += std::conj(g[x]) * h[x] * space.weight(x);
  third -= gh * f;

  GridFunction shifted(sites);
  for (std::size_t y = 0; y < sites; ++y) {
    const GridFunction e = space.site_indicator(y);
    if (h[y] != cplx{}) {
      for (std::size_t x = 0; x < sites; ++x) shifted[x] = g[x] * space.twist(y, x);
      first -= h[y] * create(space, e, create(space, shifted, f));

      for (std::size_t x = 0; x < sites; ++x) shifted[x] = g[x] * std::conj(space.twist(x, y));
      third -= h[y] * create(space, e, annihilate(space, shifted, f));
    }
    const cplx hbar = std::conj(h[y]);
    if (hbar != cplx{}) {
      for (std::size_t x = 0; x < sites; ++x) shifted[x] = g[x] * std::conj(space.twist(y, x));
      second -= hbar * annihilate(space, e, annihilate(space, shifted, f));
    }
  }
  return QcrTerms{std::move(first), std::move(second), std::move(third)};
}

QcrResidual qcr_residual(const SiteSpace& space, const GridFunction& g,
                         const GridFunction& h, const FockVector& f) {
  const QcrTerms terms = qcr_terms(space, g, h, f);
  return QcrResidual{fock_norm(space, terms.exchange_create),
                     fock_norm(space, terms.exchange_annihilate),
                     fock_norm(space, terms.mixed)};
}

FockVector reorder_residual(const SiteSpace& space, const GridFunction& h1,
                            const GridFunction& h2, const FockVector& f) {
  check_function(space, h1, "reorder_residual");
  check_function(space, h2, "reorder_residual");
  check_vector(space, f, "reorder_residual");
  require_headroom(f, 1, "reorder_residual");
  const std::size_t sites = space.size();

  FockVector out = create(space, h1, annihilate(space, conjugate(h2), f));
  cplx mass = 0.0;
  for (std::size_t x = 0; x < sites; ++x) mass += h1[x] * h2[x] * space.weight(x);
  out += (space.eta() * mass) * f;

  // sum_x h1(x) a-(k_x) a+(e_x) F with k_x(y) = conj(h2(y) Q(x,y)).
  GridFunction k(sites);
  for (std::size_t x = 0; x < sites; ++x) {
    if (h1[x] == cplx{}) continue;
    for (std::size_t y = 0; y < sites; ++y) k[y] = std::conj(h2[y] * space.twist(x, y));
    out -= h1[x] * annihilate(space, k, create(space, space.site_indicator(x), f));
  }
  return out;
}

double exclusion_norm(const SiteSpace& space, const GridFunction& h, int k,
                      const FockVector& f) {
  check_function(space, h, "exclusion_norm");
  check_vector(space, f, "exclusion_norm");
  if (!space.kernel().is_nontrivial_root_of_unity(k)) {
    std::ostringstream msg;
    msg << "exclusion_norm: q is not a nontrivial root of unity of order " << k;
    throw std::invalid_argument(msg.str());
  }
  require_headroom(f, static_cast<std::size_t>(k), "exclusion_norm");
  FockVector v = f;
  for (int i = 0; i < k; ++i) v = create(space, h, v);
  return fock_norm(space, v);
}

}  // namespace anyonfock
