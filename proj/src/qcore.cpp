#include "anyonfock/qcore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace anyonfock {

namespace {

std::atomic<std::size_t> g_entry_cap{10'000'000};

}  // namespace

std::size_t tensor_entry_cap() { return g_entry_cap.load(); }
void set_tensor_entry_cap(std::size_t cap) { g_entry_cap.store(cap); }

// ---------------------------------------------------------------------------

QKernel::QKernel(cplx q) : QKernel(q, q.real()) {}

QKernel::QKernel(cplx q, double eta) : q_(q), eta_(eta) {
  if (std::abs(std::abs(q) - 1.0) > 1e-12) {
    throw std::invalid_argument("QKernel: |q| must be 1");
  }
  if (!std::isfinite(eta)) {
    throw std::invalid_argument("QKernel: eta must be finite");
  }
}

QKernel QKernel::from_angle(long num, long den, std::optional<double> eta) {
  if (den == 0) throw std::invalid_argument("QKernel: zero angle denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  // Reduce first so that the common roots come out exact.
  const long r = ((num % den) + den) % den;
  const double turn = static_cast<double>(r) / static_cast<double>(den);
  cplx q;
  if (r == 0) {
    q = 1.0;
  } else if (2 * r == den) {
    q = -1.0;
  } else if (4 * r == den) {
    q = cplx(0.0, 1.0);
  } else if (4 * r == 3 * den) {
    q = cplx(0.0, -1.0);
  } else {
    const double theta = 2.0 * std::numbers::pi * turn;
    q = cplx(std::cos(theta), std::sin(theta));
  }
  return eta ? QKernel(q, *eta) : QKernel(q);
}

bool QKernel::is_nontrivial_root_of_unity(int k, double tol) const {
  if (k < 1) return false;
  if (std::abs(q_ - 1.0) <= tol) return false;
  cplx p = 1.0;
  for (int i = 0; i < k; ++i) p *= q_;
  return std::abs(p - 1.0) <= tol;
}

// ---------------------------------------------------------------------------

Grid::Grid(std::vector<double> axis_coords, std::vector<double> weights,
           std::size_t fiber_dim)
    : coords_(std::move(axis_coords)),
      weights_(std::move(weights)),
      fiber_dim_(fiber_dim) {
  if (coords_.empty()) throw std::invalid_argument("Grid: no axis sites");
  if (coords_.size() != weights_.size()) {
    throw std::invalid_argument("Grid: coords and weights differ in length");
  }
  if (fiber_dim_ == 0) throw std::invalid_argument("Grid: fiber_dim must be >= 1");
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw std::invalid_argument("Grid: non-finite axis coordinate");
    }
    if (i > 0 && !(coords_[i] > coords_[i - 1])) {
      throw std::invalid_argument("Grid: axis coords must be strictly increasing");
    }
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw std::invalid_argument("Grid: weights must be positive");
    }
  }
}

Grid Grid::uniform(std::size_t cells, std::size_t fiber_dim, double total_mass) {
  if (cells == 0) throw std::invalid_argument("Grid: no axis sites");
  std::vector<double> coords(cells);
  std::iota(coords.begin(), coords.end(), 1.0);
  std::vector<double> weights(cells, total_mass / static_cast<double>(cells));
  return Grid(std::move(coords), std::move(weights), fiber_dim);
}

double Grid::total_mass() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double Grid::max_weight() const {
  return *std::max_element(weights_.begin(), weights_.end());
}

double Grid::mass_position(std::size_t axis) const {
  double before = 0.0;
  for (std::size_t i = 0; i < axis; ++i) before += weights_[i];
  return (before + 0.5 * weights_[axis]) / total_mass();
}

Grid Grid::split_cells() const {
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(2 * coords_.size());
  weights.reserve(2 * coords_.size());
  double before = 0.0;
  for (double w : weights_) {
    coords.push_back(before + 0.25 * w);
    coords.push_back(before + 0.75 * w);
    weights.push_back(0.5 * w);
    weights.push_back(0.5 * w);
    before += w;
  }
  return Grid(std::move(coords), std::move(weights), fiber_dim_);
}

Grid Grid::rescaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("Grid: rescale factor must be positive");
  std::vector<double> weights = weights_;
  for (double& w : weights) w *= c;
  return Grid(coords_, std::move(weights), fiber_dim_);
}

// ---------------------------------------------------------------------------

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pointwise_product: size mismatch");
  GridFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

GridFunction conjugate(const GridFunction& a) {
  GridFunction out(a.size());
  std::transform(a.begin(), a.end(), out.begin(),
                 [](cplx z) { return std::conj(z); });
  return out;
}

cplx weighted_sum(const Grid& grid, const GridFunction& f) {
  if (f.size() != grid.site_count()) throw std::invalid_argument("weighted_sum: size mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * grid.site_weight(i);
  return s;
}

double weighted_sum(const Grid& grid, const RealFunction& f) {
  if (f.size() != grid.site_count()) throw std::invalid_argument("weighted_sum: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * grid.site_weight(i);
  return s;
}

cplx weighted_pairing(const Grid& grid, const GridFunction& a,
                      const GridFunction& b) {
  return weighted_sum(grid, pointwise_product(a, b));
}

GridFunction to_complex(const RealFunction& f) {
  return GridFunction(f.begin(), f.end());
}

// ---------------------------------------------------------------------------

std::vector<Permutation> all_permutations(int k) {
  if (k < 0) throw std::invalid_argument("all_permutations: negative size");
  Permutation p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  }
  return inv;
}

int inversion_count(const Permutation& perm) {
  int count = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] > perm[j]) ++count;
    }
  }
  return count;
}

bool is_permutation(std::span<const int> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= perm.size() ||
        seen[static_cast<std::size_t>(v)]) {
      return false;
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

cplx q_pi(const QKernel& kernel, std::span<const double> coords,
          std::span<const int> perm) {
  if (coords.size() != perm.size()) {
    throw std::invalid_argument("q_pi: coords and permutation differ in size");
  }
  if (!is_permutation(perm)) throw std::invalid_argument("q_pi: not a permutation");
  cplx product = 1.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] > perm[j]) product *= kernel(coords[i], coords[j]);
    }
  }
  return product;
}

// ---------------------------------------------------------------------------

std::size_t checked_tensor_size(std::size_t order, std::size_t sites) {
  const std::size_t cap = tensor_entry_cap();
  std::size_t size = 1;
  for (std::size_t i = 0; i < order; ++i) {
    if (sites != 0 && size > cap / sites) {
      std::ostringstream msg;
      msg << "tensor of order " << order << " over " << sites
          << " sites exceeds the entry cap " << cap;
      throw ResourceError(msg.str());
    }
    size *= sites;
  }
  if (size > cap) {
    std::ostringstream msg;
    msg << "tensor of order " << order << " over " << sites
        << " sites exceeds the entry cap " << cap;
    throw ResourceError(msg.str());
  }
  return size;
}

template <class T>
BasicTensor<T>::BasicTensor(std::size_t order, std::size_t sites)
    : order_(order), sites_(sites), data_(checked_tensor_size(order, sites)) {}

template <class T>
void BasicTensor<T>::unflatten(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t k = order_; k-- > 0;) {
    idx[k] = flat % sites_;
    flat /= sites_;
  }
}

template <class T>
std::size_t BasicTensor<T>::flatten(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < order_; ++k) flat = flat * sites_ + idx[k];
  return flat;
}

template <class T>
BasicTensor<T>& BasicTensor<T>::operator+=(const BasicTensor& other) {
  if (other.order_ != order_ || other.sites_ != sites_) {
    throw std::invalid_argument("tensor shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

template <class T>
BasicTensor<T>& BasicTensor<T>::operator-=(const BasicTensor& other) {
  if (other.order_ != order_ || other.sites_ != sites_) {
    throw std::invalid_argument("tensor shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

template <class T>
BasicTensor<T>& BasicTensor<T>::operator*=(T factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

template <class T>
double BasicTensor<T>::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

template <class T>
bool BasicTensor<T>::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const T& v) { return v == T{}; });
}

template class BasicTensor<cplx>;
template class BasicTensor<double>;

Tensor outer(const Tensor& a, const Tensor& b) {
  if (a.sites() != b.sites()) throw std::invalid_argument("outer: site count mismatch");
  Tensor out(a.order() + b.order(), a.sites());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx ai = a[i];
    for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = ai * b[j];
  }
  return out;
}

Tensor as_tensor(const GridFunction& f) {
  Tensor t(1, f.size());
  t.data() = f;
  return t;
}

cplx integrate(const Grid& grid, const Tensor& tensor) {
  if (tensor.sites() != grid.site_count()) {
    throw std::invalid_argument("integrate: tensor dimension does not match the grid");
  }
  std::vector<std::size_t> idx(tensor.order());
  cplx total = 0.0;
  for (std::size_t flat = 0; flat < tensor.size(); ++flat) {
    tensor.unflatten(flat, idx);
    double w = 1.0;
    for (std::size_t s : idx) w *= grid.site_weight(s);
    total += tensor[flat] * w;
  }
  return total;
}

}  // namespace anyonfock
