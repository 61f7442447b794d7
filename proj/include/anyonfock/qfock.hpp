#ifndef ANYONFOCK_QFOCK_HPP
#define ANYONFOCK_QFOCK_HPP

// Truncated Q-symmetric Fock space over a finite site space.
//
// Level n of a FockVector is a dense order-n tensor over the sites.  Entries
// on tuples containing two Delta-related sites are kept at zero, and each
// level is Q-symmetric.  The inner product carries the n! weight of the
// Q-Fock space:
//
//   <F, G> = sum_n n! sum_x f_n(x) conj(g_n(x)) w(x_1)...w(x_n).

#include <cstddef>
#include <vector>

#include "anyonfock/qcore.hpp"

namespace anyonfock {

/// The measure space a Fock space is built on: sites with weights, a Delta
/// relation (shared axis index) and a twist matrix.
class SiteSpace {
 public:
  /// Sites of the grid with Q evaluated on axis coordinates.
  static SiteSpace from_grid(const Grid& grid, const QKernel& kernel);

  /// General form.  twist is row-major size x size, twist[a*size+b] = Q(a,b).
  SiteSpace(std::vector<std::size_t> axis_index, std::vector<double> weights,
            std::vector<cplx> twist, QKernel kernel);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t s) const { return weights_[s]; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t axis_index(std::size_t s) const { return axis_[s]; }
  bool delta_related(std::size_t a, std::size_t b) const {
    return axis_[a] == axis_[b];
  }
  cplx twist(std::size_t a, std::size_t b) const { return twist_[a * size() + b]; }
  const QKernel& kernel() const { return kernel_; }
  double eta() const { return kernel_.eta(); }
  double max_weight() const;

  /// Kronecker indicator of one site (not divided by the weight).
  GridFunction site_indicator(std::size_t s) const;

 private:
  std::vector<std::size_t> axis_;
  std::vector<double> weights_;
  std::vector<cplx> twist_;
  QKernel kernel_;
};

class FockVector {
 public:
  FockVector(std::size_t site_count, std::size_t max_level);

  static FockVector vacuum(std::size_t site_count, std::size_t max_level);

  std::size_t max_level() const { return levels_.size() - 1; }
  std::size_t site_count() const { return sites_; }

  Tensor& level(std::size_t n) { return levels_.at(n); }
  const Tensor& level(std::size_t n) const { return levels_.at(n); }

  /// Highest level with a nonzero entry, or -1 for the zero vector.
  int top_level() const;

  /// Set when an operation dropped nonzero content above max_level.
  bool truncated() const { return truncated_; }
  void mark_truncated() { truncated_ = true; }

  FockVector& operator+=(const FockVector& other);
  FockVector& operator-=(const FockVector& other);
  FockVector& operator*=(cplx factor);

 private:
  std::size_t sites_;
  std::vector<Tensor> levels_;
  bool truncated_ = false;
};

FockVector operator+(FockVector a, const FockVector& b);
FockVector operator-(FockVector a, const FockVector& b);
FockVector operator*(cplx factor, FockVector a);

/// Weighted entrywise pairing sum f conj(g) prod w of one level.
cplx level_pairing(const SiteSpace& space, const Tensor& f, const Tensor& g);
cplx fock_inner(const SiteSpace& space, const FockVector& f, const FockVector& g);
double fock_norm(const SiteSpace& space, const FockVector& f);

/// Default largest order accepted by project_qsym.
inline constexpr std::size_t kDefaultFactorialCap = 8;

/// Q-symmetrization P_n, zeroed on Delta-touching tuples.
Tensor project_qsym(const SiteSpace& space, const Tensor& tensor,
                    std::size_t factorial_cap = kDefaultFactorialCap);

/// Zeroes every entry on a tuple with two Delta-related sites.
void restrict_off_delta(const SiteSpace& space, Tensor& tensor);

/// Creation a+(h): level n+1 = P(h (x) level n).  Content pushed above
/// max_level is dropped and flagged.
FockVector create(const SiteSpace& space, const GridFunction& h,
                  const FockVector& f);

/// Annihilation a-(h): level n-1 = n sum_y conj(h(y)) f(y, .) w(y).
FockVector annihilate(const SiteSpace& space, const GridFunction& h,
                      const FockVector& f);

/// Level-wise annihilation on a single tensor.
Tensor annihilate_level(const SiteSpace& space, const GridFunction& h,
                        const Tensor& f);

enum class Sign { plus, minus };

/// Operators b+/b- on the full (not Q-symmetric) Fock space.
Tensor b_apply(Sign sign, const SiteSpace& space, const GridFunction& h,
               const Tensor& f);

/// Residual vectors of the three smeared commutation relations:
///   (i)   a+(g)a+(h)F - sum g(x)h(y)Q(y,x) a+(e_y)a+(e_x)F
///   (ii)  a-(g)a-(h)F - sum conj(g(x)h(y)) Q(y,x) a-(e_y)a-(e_x)F
///   (iii) a-(g)a+(h)F - <g,h>F - sum conj(g(x))h(y)Q(x,y) a+(e_y)a-(e_x)F
/// e_x is the Kronecker indicator of site x, i.e. w(x) times the delta
/// function at x.
struct QcrTerms {
  FockVector exchange_create;
  FockVector exchange_annihilate;
  FockVector mixed;
};

struct QcrResidual {
  double exchange_create = 0.0;
  double exchange_annihilate = 0.0;
  double mixed = 0.0;
};

/// Requires two free levels above the top level of F.
QcrTerms qcr_terms(const SiteSpace& space, const GridFunction& g,
                   const GridFunction& h, const FockVector& f);
QcrResidual qcr_residual(const SiteSpace& space, const GridFunction& g,
                         const GridFunction& h, const FockVector& f);

/// a+(h1) a-(conj h2) F - [sum h1(x)h2(y)Q(x,y) a-(e_y)a+(e_x)F
///                         - eta sum h1 h2 w F]
/// i.e. the smeared form of d+_x d-_y = Q(x,y) d-_y d+_x - eta delta(x,y).
FockVector reorder_residual(const SiteSpace& space, const GridFunction& h1,
                            const GridFunction& h2, const FockVector& f);

/// Norm of a+(h)^k F.  Requires q^k = 1, q != 1.
double exclusion_norm(const SiteSpace& space, const GridFunction& h, int k,
                      const FockVector& f);

}  // namespace anyonfock

#endif  // ANYONFOCK_QFOCK_HPP
