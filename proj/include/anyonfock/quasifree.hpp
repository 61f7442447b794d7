#ifndef ANYONFOCK_QUASIFREE_HPP
#define ANYONFOCK_QUASIFREE_HPP

// Doubled-space representation of the gauge-invariant quasi-free state.
//
// Z is two tagged copies of the base sites, z = copy * S + s with copy 0
// standing for X_1 and copy 1 for X_2.  Both copies of a base site share its
// axis index, so Delta on Z is "same axis index, either copy".

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "anyonfock/qcore.hpp"
#include "anyonfock/qfock.hpp"

namespace anyonfock {

class DoubledGrid {
 public:
  DoubledGrid(Grid base, QKernel kernel);

  const Grid& base() const { return base_; }
  const QKernel& kernel() const { return kernel_; }
  /// Site space of Z with the JQ twist.
  const SiteSpace& space() const { return space_; }
  std::size_t base_sites() const { return base_.site_count(); }

  /// JQ(z1, z2): Q(z1, z2) for equal copies, Q(z2, z1) otherwise.
  cplx jq(std::size_t z1, std::size_t z2) const { return space_.twist(z1, z2); }

  /// Places a base-grid function on copy 0 or 1 (zero on the other copy).
  GridFunction embed(const GridFunction& h, int copy) const;

 private:
  Grid base_;
  QKernel kernel_;
  SiteSpace space_;
};

/// The pair K1 = sqrt(T), K2 = sqrt(1 + eta T) for T block diagonal over axis
/// sites, each block a real symmetric PSD fiber_dim x fiber_dim matrix.
class KPair {
 public:
  KPair(const Grid& grid, std::vector<Eigen::MatrixXd> t_blocks, double eta);

  /// T = kappa^2 * identity.
  static KPair scalar(const Grid& grid, double kappa, double eta);
  /// The same fiber block on every axis site.
  static KPair uniform_block(const Grid& grid, const Eigen::MatrixXd& block,
                             double eta);

  double eta() const { return eta_; }
  std::size_t fiber_dim() const { return fiber_; }
  std::size_t axis_size() const { return t_.size(); }
  const Eigen::MatrixXd& t_block(std::size_t axis) const { return t_[axis]; }
  const Eigen::MatrixXd& k1_block(std::size_t axis) const { return k1_[axis]; }
  const Eigen::MatrixXd& k2_block(std::size_t axis) const { return k2_[axis]; }

  GridFunction apply_t(const GridFunction& h) const;
  GridFunction apply_k1(const GridFunction& h) const;
  GridFunction apply_k2(const GridFunction& h) const;

  /// max over blocks of |K2^T K2 - (1 + eta K1^T K1)|.
  double constraint_residual() const;

  /// Dense operator norm (Frobenius) of [K, M_psi] for K1 and K2, where
  /// psi is a function of the axis index.
  double multiplication_commutator(const std::vector<double>& psi) const;

 private:
  GridFunction apply_blocks(const std::vector<Eigen::MatrixXd>& blocks,
                            const GridFunction& h) const;
  Eigen::MatrixXd dense(const std::vector<Eigen::MatrixXd>& blocks) const;

  std::size_t fiber_;
  std::vector<Eigen::MatrixXd> t_;
  std::vector<Eigen::MatrixXd> k1_;
  std::vector<Eigen::MatrixXd> k2_;
  double eta_;
};

struct Letter {
  Sign sign;
  GridFunction smear;  // on the base grid
};

using Word = std::vector<Letter>;

/// Reversed word with flipped signs and conjugated smears (the adjoint).
Word adjoint(const Word& word);

/// D+(h) = a-(conj(K1 h), copy 0) + a+(K2 h, copy 1);
/// D-(h) = a+(K1 h, copy 0) + a-(conj(K2 h), copy 1).
FockVector d_apply(Sign sign, const GridFunction& h, const KPair& pair,
                   const DoubledGrid& grid, const FockVector& f);

/// (D_word Omega, Omega), letters applied right to left.  max_level defaults
/// to ceil(length / 2).  Levels that cannot return to the vacuum with the
/// remaining letters are dropped after every step, which is exact.
cplx tau_vacuum(const Word& word, const KPair& pair, const DoubledGrid& grid);
cplx tau_vacuum(const Word& word, const KPair& pair, const DoubledGrid& grid,
                std::size_t max_level);

/// sum_x g(x) (T h)(x) w(x), no conjugation.
cplx s11(const GridFunction& g, const GridFunction& h, const KPair& pair,
         const Grid& grid);

/// Largest n accepted by npoint_qpermanent.
inline constexpr std::size_t kMaxQPermanentOrder = 6;

/// sum_pi sum_x prod_i g_i(x_i)(T h_pi(i))(x_i) Q_pi(x) prod w(x_i), with Q
/// taking its diagonal value on equal axis coordinates.
cplx npoint_qpermanent(const std::vector<GridFunction>& gs,
                       const std::vector<GridFunction>& hs, const KPair& pair,
                       const Grid& grid, const QKernel& kernel);

struct NpointCrosscheck {
  cplx value_fock;
  cplx value_qperm;
  double residual;
};

/// Largest n accepted by crosscheck_npoint.
inline constexpr std::size_t kMaxCrosscheckOrder = 3;

/// Fock route on the word (+,g_n)...(+,g_1)(-,h_1)...(-,h_n) against the
/// Q-permanent.
NpointCrosscheck crosscheck_npoint(const std::vector<GridFunction>& gs,
                                   const std::vector<GridFunction>& hs,
                                   const KPair& pair, const DoubledGrid& grid);

/// G_ij = tau(adjoint(A_i) A_j).
Eigen::MatrixXcd gram_matrix(const std::vector<Word>& words, const KPair& pair,
                             const DoubledGrid& grid);

/// Smallest eigenvalue of the Hermitian part of a square matrix.
double min_eigenvalue(const Eigen::MatrixXcd& m);

/// Norm of D+(h)^k Omega on the doubled space.
double d_power_norm(const GridFunction& h, int k, const KPair& pair,
                    const DoubledGrid& grid);

/// Reference permanent (Ryser) and determinant of a small square matrix.
cplx permanent(const Eigen::MatrixXcd& m);
cplx determinant(const Eigen::MatrixXcd& m);

}  // namespace anyonfock

#endif  // ANYONFOCK_QUASIFREE_HPP
