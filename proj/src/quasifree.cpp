#include "anyonfock/quasifree.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anyonfock {

namespace {

SiteSpace doubled_space(const Grid& base, const QKernel& kernel) {
  const std::size_t s = base.site_count();
  const std::size_t n = 2 * s;
  std::vector<std::size_t> axis(n);
  std::vector<double> weights(n);
  std::vector<cplx> twist(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    axis[a] = base.axis_of(a % s);
    weights[a] = base.site_weight(a % s);
  }
  for (std::size_t a = 0; a < n; ++a) {
    const double ca = base.site_coord(a % s);
    for (std::size_t b = 0; b < n; ++b) {
      const double cb = base.site_coord(b % s);
      const bool same_copy = (a / s) == (b / s);
      twist[a * n + b] = same_copy ? kernel(ca, cb) : kernel(cb, ca);
    }
  }
  return SiteSpace(std::move(axis), std::move(weights), std::move(twist), kernel);
}

void check_eta(const KPair& pair, const DoubledGrid& grid) {
  if (std::abs(pair.eta() - grid.kernel().eta()) > 1e-14) {
    throw std::invalid_argument("KPair eta differs from the kernel eta");
  }
}

void check_base_function(const GridFunction& h, std::size_t sites, const char* where) {
  if (h.size() != sites) {
    std::ostringstream msg;
    msg << where << ": smear has " << h.size() << " values, expected " << sites;
    throw std::invalid_argument(msg.str());
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd vals = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * vals.asDiagonal() * solver.eigenvectors().transpose();
}

void zero_levels_above(FockVector& f, std::size_t keep) {
  for (std::size_t n = keep + 1; n <= f.max_level(); ++n) {
    auto& data = f.level(n).data();
    std::fill(data.begin(), data.end(), cplx{});
  }
}

}  // namespace

// ---------------------------------------------------------------------------

DoubledGrid::DoubledGrid(Grid base, QKernel kernel)
    : base_(std::move(base)), kernel_(kernel), space_(doubled_space(base_, kernel_)) {}

GridFunction DoubledGrid::embed(const GridFunction& h, int copy) const {
  check_base_function(h, base_sites(), "embed");
  if (copy != 0 && copy != 1) throw std::invalid_argument("embed: copy must be 0 or 1");
  GridFunction out(2 * base_sites(), 0.0);
  std::copy(h.begin(), h.end(), out.begin() + static_cast<std::ptrdiff_t>(copy * base_sites()));
  return out;
}

// ---------------------------------------------------------------------------

KPair::KPair(const Grid& grid, std::vector<Eigen::MatrixXd> t_blocks, double eta)
    : fiber_(grid.fiber_dim()), t_(std::move(t_blocks)), eta_(eta) {
  if (t_.size() != grid.axis_size()) {
    throw std::invalid_argument("KPair: need one T block per axis site");
  }
  if (!std::isfinite(eta)) throw std::invalid_argument("KPair: eta must be finite");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(fiber_, fiber_);
  for (std::size_t a = 0; a < t_.size(); ++a) {
    const Eigen::MatrixXd& t = t_[a];
    if (t.rows() != static_cast<Eigen::Index>(fiber_) ||
        t.cols() != static_cast<Eigen::Index>(fiber_)) {
      throw std::invalid_argument("KPair: T block has the wrong size");
    }
    if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("KPair: T block is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -1e-12) throw std::invalid_argument("KPair: T block is not PSD");
    if (eta < 0.0 && hi > -1.0 / eta + 1e-12) {
      throw std::invalid_argument("KPair: T exceeds -1/eta for negative eta");
    }
    k1_.push_back(psd_sqrt(t));
    k2_.push_back(psd_sqrt(id + eta * t));
  }
}

KPair KPair::scalar(const Grid& grid, double kappa, double eta) {
  if (!(kappa > 0.0)) throw std::invalid_argument("KPair: kappa must be positive");
  const std::size_t f = grid.fiber_dim();
  std::vector<Eigen::MatrixXd> blocks(grid.axis_size(),
                                      kappa * kappa * Eigen::MatrixXd::Identity(f, f));
  return KPair(grid, std::move(blocks), eta);
}

KPair KPair::uniform_block(const Grid& grid, const Eigen::MatrixXd& block, double eta) {
  return KPair(grid, std::vector<Eigen::MatrixXd>(grid.axis_size(), block), eta);
}

GridFunction KPair::apply_blocks(const std::vector<Eigen::MatrixXd>& blocks,
                                 const GridFunction& h) const {
  check_base_function(h, blocks.size() * fiber_, "KPair");
  GridFunction out(h.size(), 0.0);
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t i = 0; i < fiber_; ++i) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < fiber_; ++j) {
        acc += blocks[a](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
               h[a * fiber_ + j];
      }
      out[a * fiber_ + i] = acc;
    }
  }
  return out;
}

GridFunction KPair::apply_t(const GridFunction& h) const { return apply_blocks(t_, h); }
GridFunction KPair::apply_k1(const GridFunction& h) const { return apply_blocks(k1_, h); }
GridFunction KPair::apply_k2(const GridFunction& h) const { return apply_blocks(k2_, h); }

double KPair::constraint_residual() const {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(fiber_, fiber_);
  double worst = 0.0;
  for (std::size_t a = 0; a < t_.size(); ++a) {
    const Eigen::MatrixXd r =
        k2_[a].transpose() * k2_[a] - (id + eta_ * k1_[a].transpose() * k1_[a]);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::MatrixXd KPair::dense(const std::vector<Eigen::MatrixXd>& blocks) const {
  const auto n = static_cast<Eigen::Index>(blocks.size() * fiber_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const auto f = static_cast<Eigen::Index>(fiber_);
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    m.block(static_cast<Eigen::Index>(a) * f, static_cast<Eigen::Index>(a) * f, f, f) = blocks[a];
  }
  return m;
}

double KPair::multiplication_commutator(const std::vector<double>& psi) const {
  if (psi.size() != t_.size()) {
    throw std::invalid_argument("multiplication_commutator: psi must have one value per axis site");
  }
  const auto n = static_cast<Eigen::Index>(t_.size() * fiber_);
  Eigen::MatrixXd mpsi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mpsi(i, i) = psi[static_cast<std::size_t>(i) / fiber_];
  }
  double worst = 0.0;
  for (const auto* blocks : {&k1_, &k2_}) {
    const Eigen::MatrixXd k = dense(*blocks);
    worst = std::max(worst, (k * mpsi - mpsi * k).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------

Word adjoint(const Word& word) {
  Word out;
  out.reserve(word.size());
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    out.push_back(Letter{it->sign == Sign::plus ? Sign::minus : Sign::plus,
                         conjugate(it->smear)});
  }
  return out;
}

namespace {

// Content pushed above max_level is dropped and flagged by create.
FockVector d_apply_truncating(Sign sign, const GridFunction& h, const KPair& pair,
                              const DoubledGrid& grid, const FockVector& f) {
  const SiteSpace& z = grid.space();
  const GridFunction k1h = pair.apply_k1(h);
  const GridFunction k2h = pair.apply_k2(h);
  if (sign == Sign::plus) {
    return annihilate(z, grid.embed(conjugate(k1h), 0), f) +
           create(z, grid.embed(k2h, 1), f);
  }
  return create(z, grid.embed(k1h, 0), f) +
         annihilate(z, grid.embed(conjugate(k2h), 1), f);
}

}  // namespace

FockVector d_apply(Sign sign, const GridFunction& h, const KPair& pair,
                   const DoubledGrid& grid, const FockVector& f) {
  check_eta(pair, grid);
  check_base_function(h, grid.base_sites(), "d_apply");
  const int top = f.top_level();
  if (top >= 0 && static_cast<std::size_t>(top) + 1 > f.max_level()) {
    throw HeadroomError("d_apply: no free level above the top level");
  }
  return d_apply_truncating(sign, h, pair, grid, f);
}

cplx tau_vacuum(const Word& word, const KPair& pair, const DoubledGrid& grid) {
  return tau_vacuum(word, pair, grid, std::max<std::size_t>((word.size() + 1) / 2, 1));
}

cplx tau_vacuum(const Word& word, const KPair& pair, const DoubledGrid& grid,
                std::size_t max_level) {
  check_eta(pair, grid);
  const std::size_t half = word.size() / 2 + word.size() % 2;
  if (max_level < half) {
    std::ostringstream msg;
    msg << "tau_vacuum: a word of length " << word.size() << " needs max_level >= "
        << half << ", got " << max_level;
    throw HeadroomError(msg.str());
  }
  for (const Letter& letter : word) {
    check_base_function(letter.smear, grid.base_sites(), "tau_vacuum");
  }
  // With i letters left, anything above level i can no longer reach the
  // vacuum, and the level lost to truncation is always above i.
  FockVector v = FockVector::vacuum(grid.space().size(), max_level);
  for (std::size_t i = word.size(); i-- > 0;) {
    v = d_apply_truncating(word[i].sign, word[i].smear, pair, grid, v);
    zero_levels_above(v, i);
  }
  return v.level(0)[0];
}

cplx s11(const GridFunction& g, const GridFunction& h, const KPair& pair,
         const Grid& grid) {
  check_base_function(g, grid.site_count(), "s11");
  const GridFunction th = pair.apply_t(h);
  cplx total = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) total += g[x] * th[x] * grid.site_weight(x);
  return total;
}

cplx npoint_qpermanent(const std::vector<GridFunction>& gs,
                       const std::vector<GridFunction>& hs, const KPair& pair,
                       const Grid& grid, const QKernel& kernel) {
  const std::size_t n = gs.size();
  if (hs.size() != n) throw std::invalid_argument("npoint_qpermanent: need as many g as h");
  if (n == 0) return 1.0;
  if (n > kMaxQPermanentOrder) {
    std::ostringstream msg;
    msg << "npoint_qpermanent: n = " << n << " exceeds " << kMaxQPermanentOrder;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t sites = grid.site_count();
  // u[i][j][x] = g_i(x) (T h_j)(x) w(x)
  std::vector<std::vector<GridFunction>> u(n, std::vector<GridFunction>(n));
  for (std::size_t j = 0; j < n; ++j) {
    check_base_function(hs[j], sites, "npoint_qpermanent");
    const GridFunction th = pair.apply_t(hs[j]);
    for (std::size_t i = 0; i < n; ++i) {
      check_base_function(gs[i], sites, "npoint_qpermanent");
      u[i][j].resize(sites);
      for (std::size_t x = 0; x < sites; ++x) {
        u[i][j][x] = gs[i][x] * th[x] * grid.site_weight(x);
      }
    }
  }
  const auto perms = all_permutations(static_cast<int>(n));
  const std::size_t tuples = checked_tensor_size(n, sites);
  std::vector<std::size_t> idx(n);
  std::vector<double> coords(n);
  cplx total = 0.0;
  // Permutations in rank order, tuples in flat order: a fixed reduction order.
  for (const Permutation& pi : perms) {
    cplx partial = 0.0;
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      std::size_t rest = flat;
      for (std::size_t k = n; k-- > 0;) {
        idx[k] = rest % sites;
        rest /= sites;
      }
      cplx term = 1.0;
      for (std::size_t i = 0; i < n && term != cplx{}; ++i) {
        term *= u[i][static_cast<std::size_t>(pi[i])][idx[i]];
      }
      if (term == cplx{}) continue;
      for (std::size_t i = 0; i < n; ++i) coords[i] = grid.site_coord(idx[i]);
      partial += term * q_pi(kernel, coords, pi);
    }
    total += partial;
  }
  return total;
}

NpointCrosscheck crosscheck_npoint(const std::vector<GridFunction>& gs,
                                   const std::vector<GridFunction>& hs,
                                   const KPair& pair, const DoubledGrid& grid) {
  const std::size_t n = gs.size();
  if (hs.size() != n) throw std::invalid_argument("crosscheck_npoint: need as many g as h");
  if (n > kMaxCrosscheckOrder) {
    std::ostringstream msg;
    msg << "crosscheck_npoint: n = " << n << " exceeds " << kMaxCrosscheckOrder;
    throw std::invalid_argument(msg.str());
  }
  Word word;
  for (std::size_t i = n; i-- > 0;) word.push_back(Letter{Sign::plus, gs[i]});
  for (std::size_t i = 0; i < n; ++i) word.push_back(Letter{Sign::minus, hs[i]});
  const cplx fock = tau_vacuum(word, pair, grid, std::max<std::size_t>(n, 1));
  const cplx qperm = npoint_qpermanent(gs, hs, pair, grid.base(), grid.kernel());
  return NpointCrosscheck{fock, qperm, std::abs(fock - qperm)};
}

Eigen::MatrixXcd gram_matrix(const std::vector<Word>& words, const KPair& pair,
                             const DoubledGrid& grid) {
  const auto n = static_cast<Eigen::Index>(words.size());
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Word left = adjoint(words[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      Word w = left;
      const Word& right = words[static_cast<std::size_t>(j)];
      w.insert(w.end(), right.begin(), right.end());
      g(i, j) = tau_vacuum(w, pair, grid);
    }
  }
  return g;
}

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("min_eigenvalue: matrix is not square");
  if (m.rows() == 0) return 0.0;
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  return solver.eigenvalues().minCoeff();
}

double d_power_norm(const GridFunction& h, int k, const KPair& pair,
                    const DoubledGrid& grid) {
  if (k < 1) throw std::invalid_argument("d_power_norm: k must be >= 1");
  FockVector v = FockVector::vacuum(grid.space().size(), static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) v = d_apply(Sign::plus, h, pair, grid, v);
  return fock_norm(grid.space(), v);
}

cplx permanent(const Eigen::MatrixXcd& m) {
  const auto n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("permanent: matrix is not square");
  if (n == 0) return 1.0;
  if (n > 20) throw std::invalid_argument("permanent: matrix too large");
  // Ryser with Gray-code subset updates.
  std::vector<cplx> row_sums(static_cast<std::size_t>(n), 0.0);
  cplx total = 0.0;
  unsigned long gray = 0;
  for (unsigned long k = 1; k < (1ul << n); ++k) {
    const unsigned long next = k ^ (k >> 1);
    const unsigned long changed = next ^ gray;
    const int col = __builtin_ctzl(changed);
    const double sign = (next & changed) ? 1.0 : -1.0;
    for (int r = 0; r < n; ++r) row_sums[static_cast<std::size_t>(r)] += sign * m(r, col);
    gray = next;
    cplx prod = 1.0;
    for (const cplx& s : row_sums) prod *= s;
    const int bits = __builtin_popcountl(gray);
    total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
  }
  return total;
}

cplx determinant(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix is not square");
  if (m.rows() == 0) return 1.0;
  return m.partialPivLu().determinant();
}

}  // namespace anyonfock
