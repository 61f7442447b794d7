#ifndef ANYONFOCK_DENSITY_HPP
#define ANYONFOCK_DENSITY_HPP

// Renormalized particle density: the Jacobi field R^(phi) on symmetric
// tensors, vacuum moments, the positivity witness and Meixner coefficients.
// Smears are real; sites of the grid are the points of the density.

#include <cstddef>
#include <vector>

#include "anyonfock/qcore.hpp"

namespace anyonfock {

struct DensityParams {
  /// Throws if kappa <= 0, or if eta < 0 and kappa^2 >= 1/|eta|.
  DensityParams(double eta, double kappa);

  double eta;
  double kappa;
  double beta;    // sqrt(eta + kappa^-2)
  double lambda;  // beta + eta / beta
  double scale;   // kappa sqrt(1 + eta kappa^2)
};

/// Truncated Fock space of fully symmetric real tensors (no Delta restriction).
class SymFock {
 public:
  SymFock(std::size_t site_count, std::size_t max_level);
  static SymFock vacuum(std::size_t site_count, std::size_t max_level);

  std::size_t max_level() const { return levels_.size() - 1; }
  std::size_t site_count() const { return sites_; }
  RealTensor& level(std::size_t n) { return levels_.at(n); }
  const RealTensor& level(std::size_t n) const { return levels_.at(n); }
  int top_level() const;

  SymFock& operator+=(const SymFock& other);
  SymFock& operator*=(double factor);

 private:
  std::size_t sites_;
  std::vector<RealTensor> levels_;
};

/// Order-n symmetric tensor phi_1 (.) ... (.) phi_n, the average of all
/// ordered outer products.
RealTensor sym_product(const std::vector<RealFunction>& factors);

/// Largest deviation of a tensor from its argument-permuted copies.
double symmetry_defect(const RealTensor& t);

enum class JacobiPart { create, neutral, annih1, annih2 };

/// One of the four parts of R^(phi):
///   create  f -> phi (.) f
///   neutral f_1(.)...(.)f_n -> sum_i f_1(.)...(.)(phi f_i)(.)...(.)f_n
///   annih1  f_1(.)...(.)f_n -> sum_i <phi f_i> f_1(.)...f_i omitted...(.)f_n
///   annih2  f_1(.)...(.)f_n -> sum_{i != j} (phi f_i f_j)(.)rest
SymFock jacobi_apply(JacobiPart part, const RealFunction& phi, const SymFock& f,
                     const Grid& grid);

/// create + lambda neutral + annih1 + eta annih2 + beta^-1 <phi> .
SymFock rhat_apply(const RealFunction& phi, const SymFock& f,
                   const DensityParams& p, const Grid& grid);

inline constexpr std::size_t kMaxDensityMomentOrder = 6;

/// Level 0 of R^(f_1)...R^(f_n) Omega (no scale factor).
double tau_moment(const std::vector<RealFunction>& fs, const DensityParams& p,
                  const Grid& grid);

/// scale^n * tau_moment.
double rho_moment(const std::vector<RealFunction>& fs, const DensityParams& p,
                  const Grid& grid);

/// 2 (sum f^2 w)^2 + 2 eta sum f^4 w.
double positivity_witness(const RealFunction& f, double eta, const Grid& grid);

struct MeixnerResult {
  std::vector<double> a;  // a_1..a_kmax (a[0] is a_1)
  std::vector<double> b;  // b_0..b_kmax
  double total_mass = 0.0;
  double hankel_condition = 0.0;
  std::size_t atoms_used = 0;
  double truncated_mass = 0.0;
};

inline constexpr int kMaxMeixnerOrder = 5;
/// Condition number of the moment Hankel matrix above which recovery fails.
inline constexpr double kMaxHankelCondition = 1e15;

/// Jacobi coefficients of zeta'(ds) = s^2 zeta(ds) recovered from moments.
MeixnerResult meixner_coeffs(const DensityParams& p, int kmax);

/// Jacobi recurrence coefficients from moments mu_0..mu_{2n-1} (Chebyshev
/// algorithm).  Returns alpha_0..alpha_{n-1} and beta_0..beta_{n-1}.
void chebyshev_algorithm(const std::vector<long double>& moments,
                         std::vector<long double>& alpha,
                         std::vector<long double>& beta);

struct GammaLimitRow {
  double kappa = 0.0;
  double tau = 0.0;
  double gamma_moment = 0.0;
  double gap = 0.0;
};

struct GammaLimitTable {
  std::vector<GammaLimitRow> rows;
  bool strictly_decreasing = false;
};

GammaLimitTable gamma_limit_check(const RealFunction& f, double eta, int n,
                                  const std::vector<double>& kappas,
                                  const Grid& grid);

}  // namespace anyonfock

#endif  // ANYONFOCK_DENSITY_HPP
