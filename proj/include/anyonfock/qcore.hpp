#ifndef ANYONFOCK_QCORE_HPP
#define ANYONFOCK_QCORE_HPP

// Discretized base space, twist kernel and permutation-weight primitives.
//
// The continuum space is collapsed to an ordered axis of cells times a finite
// fiber.  A site is a pair (axis index, fiber index), numbered
// site = axis * fiber_dim + fiber.  The twist kernel only looks at the axis
// coordinate, and two sites are Delta-related iff they share an axis index.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anyonfock {

using cplx = std::complex<double>;
using GridFunction = std::vector<cplx>;
using RealFunction = std::vector<double>;

/// Thrown when an operation would need more Fock levels than were allocated.
class HeadroomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a tensor allocation would exceed the configured entry cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Upper bound on the number of entries of any dense tensor (default 1e7).
std::size_t tensor_entry_cap();
void set_tensor_entry_cap(std::size_t cap);

/// The anyon twist Q(s,t): q below the diagonal, conj(q) above, eta on it.
class QKernel {
 public:
  /// eta defaults to Re(q).
  explicit QKernel(cplx q);
  QKernel(cplx q, double eta);

  /// q = exp(2 pi i * num / den); exact root of unity for num/den rational.
  static QKernel from_angle(long num, long den,
                            std::optional<double> eta = std::nullopt);

  cplx q() const { return q_; }
  double eta() const { return eta_; }

  cplx operator()(double s, double t) const {
    if (s < t) return q_;
    if (s > t) return std::conj(q_);
    return eta_;
  }

  /// True if q^k == 1 and q != 1 within tol.
  bool is_nontrivial_root_of_unity(int k, double tol = 1e-12) const;

 private:
  cplx q_;
  double eta_;
};

inline cplx kernel_eval(const QKernel& kernel, double s, double t) {
  return kernel(s, t);
}

class Grid {
 public:
  Grid(std::vector<double> axis_coords, std::vector<double> weights,
       std::size_t fiber_dim = 1);

  /// axis_coords = 1..cells, every weight total_mass / cells.
  static Grid uniform(std::size_t cells, std::size_t fiber_dim,
                      double total_mass);

  std::size_t axis_size() const { return coords_.size(); }
  std::size_t fiber_dim() const { return fiber_dim_; }
  std::size_t site_count() const { return coords_.size() * fiber_dim_; }

  std::size_t axis_of(std::size_t site) const { return site / fiber_dim_; }
  std::size_t fiber_of(std::size_t site) const { return site % fiber_dim_; }
  std::size_t site(std::size_t axis, std::size_t fiber) const {
    return axis * fiber_dim_ + fiber;
  }

  double coord(std::size_t axis) const { return coords_[axis]; }
  double weight(std::size_t axis) const { return weights_[axis]; }
  double site_coord(std::size_t site) const { return coords_[axis_of(site)]; }
  double site_weight(std::size_t site) const {
    return weights_[axis_of(site)];
  }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }

  double total_mass() const;
  double max_weight() const;

  /// Center of the axis cell in cumulative-mass coordinates, in (0, 1).
  double mass_position(std::size_t axis) const;

  /// Splits every axis cell in two halves; all weights halve.
  Grid split_cells() const;

  /// Same grid with every weight multiplied by c (measure rescale m -> c m).
  Grid rescaled(double c) const;

 private:
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::size_t fiber_dim_;
};

// Pointwise helpers on grid functions.
GridFunction pointwise_product(const GridFunction& a, const GridFunction& b);
GridFunction conjugate(const GridFunction& a);
cplx weighted_sum(const Grid& grid, const GridFunction& f);
double weighted_sum(const Grid& grid, const RealFunction& f);
/// sum_x a(x) b(x) m(x); bilinear, no conjugation.
cplx weighted_pairing(const Grid& grid, const GridFunction& a,
                      const GridFunction& b);
GridFunction to_complex(const RealFunction& f);

// ---------------------------------------------------------------------------
// Permutations.  A permutation of {0..k-1} is stored as its image list, so
// perm[i] = pi(i).

using Permutation = std::vector<int>;

/// All permutations of {0..k-1} in lexicographic order (rank order).
std::vector<Permutation> all_permutations(int k);
Permutation inverse(const Permutation& perm);
int inversion_count(const Permutation& perm);
bool is_permutation(std::span<const int> perm);

/// Product of Q(coords[i], coords[j]) over inversion pairs i<j, pi(i)>pi(j).
cplx q_pi(const QKernel& kernel, std::span<const double> coords,
          std::span<const int> perm);

// ---------------------------------------------------------------------------
// Dense order-n tensors over a site set of size S; entries are stored with the
// first argument most significant.

template <class T>
class BasicTensor {
 public:
  BasicTensor() = default;
  BasicTensor(std::size_t order, std::size_t sites);

  std::size_t order() const { return order_; }
  std::size_t sites() const { return sites_; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  /// Writes the multi-index of flat index `flat` into idx (length order()).
  void unflatten(std::size_t flat, std::span<std::size_t> idx) const;
  std::size_t flatten(std::span<const std::size_t> idx) const;

  BasicTensor& operator+=(const BasicTensor& other);
  BasicTensor& operator-=(const BasicTensor& other);
  BasicTensor& operator*=(T factor);

  double max_abs() const;
  bool is_zero() const;

 private:
  std::size_t order_ = 0;
  std::size_t sites_ = 0;
  std::vector<T> data_;
};

using Tensor = BasicTensor<cplx>;
using RealTensor = BasicTensor<double>;

extern template class BasicTensor<cplx>;
extern template class BasicTensor<double>;

/// S^order, checked against the entry cap.
std::size_t checked_tensor_size(std::size_t order, std::size_t sites);

/// Outer product a (x) b.
Tensor outer(const Tensor& a, const Tensor& b);
/// Order-1 tensor holding the values of f.
Tensor as_tensor(const GridFunction& f);

/// Sum of entries times the product of the axis weights of the arguments.
cplx integrate(const Grid& grid, const Tensor& tensor);

}  // namespace anyonfock

#endif  // ANYONFOCK_QCORE_HPP
