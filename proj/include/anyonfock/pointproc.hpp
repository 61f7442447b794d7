#ifndef ANYONFOCK_POINTPROC_HPP
#define ANYONFOCK_POINTPROC_HPP

// Completely random measures on the grid: Levy models, exact joint moments via
// set-partition cumulants, seeded samplers and the Laplace-transform check.
// Every grid site is one cell; with fiber_dim = 1 these are the axis cells.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "anyonfock/qcore.hpp"

namespace anyonfock {

enum class LevyKind { poisson, negbin, gamma };

std::string to_string(LevyKind kind);
LevyKind parse_levy_kind(const std::string& name);

struct LevyAtom {
  double size;
  double mass;
};

struct LevyModel {
  LevyKind kind = LevyKind::poisson;
  double eta = 0.0;
  double kappa = 1.0;
  /// Jump atoms for the discrete kinds; empty for gamma.
  std::vector<LevyAtom> atoms;
  /// Normalized cumulative atom masses, for inverse-CDF jump draws.
  std::vector<double> atom_cdf;
  /// Total Levy mass (closed form); infinity for gamma.
  double total_mass = 0.0;
  /// Mass left out by the tail truncation of the atom list.
  double truncated_mass = 0.0;
  bool infinite_activity = false;
  /// Success parameter p = eta kappa^2 / (1 + eta kappa^2) for negbin.
  double p = 0.0;
};

/// Relative tail mass at which the negbin atom list is cut.
inline constexpr double kLevyTailTolerance = 1e-14;

LevyModel build_levy(LevyKind kind, double eta, double kappa);

/// j-th moment of the Levy measure, int s^j zeta(ds), j >= 1, in closed form.
double levy_moment(const LevyModel& model, int j);

/// All set partitions of {0..n-1}, each a list of blocks.
std::vector<std::vector<std::vector<int>>> set_partitions(int n);

inline constexpr std::size_t kMaxJointMomentOrder = 6;

/// E[prod_i <f_i, gamma>] from block cumulants
/// (sum_x prod_{i in B} f_i(x) w(x)) * levy_moment(|B|).
double exact_joint_moment(const std::vector<RealFunction>& fs,
                          const LevyModel& model, const Grid& grid);

/// Negative binomial marginal of one cell of weight w:
/// (1 + kappa^2 eta)^(-w/eta) p^n (w/eta)^(n rising) / n!.
double negbin_pmf(long n, double w, double eta, double kappa);

// ---------------------------------------------------------------------------
// Random numbers.  One SplitMix64 stream per (seed, cell, replicate).

class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

enum class NegbinRoute { compound, direct };

struct PointConfiguration {
  LevyKind kind = LevyKind::poisson;
  std::vector<double> masses;  // one per cell
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  NegbinRoute route = NegbinRoute::compound;
};

/// Draw of one cell with weight w.
double sample_cell(const LevyModel& model, double w, StreamRng& rng,
                   NegbinRoute route = NegbinRoute::compound);

PointConfiguration sample(const Grid& grid, const LevyModel& model,
                          std::uint64_t seed, std::uint64_t replicate = 0,
                          NegbinRoute route = NegbinRoute::compound);

/// Row-major replicates x cells matrix of cell masses.  Replicate r uses the
/// same streams as sample(..., r), so the result does not depend on threads.
struct SampleMatrix {
  std::size_t replicates = 0;
  std::size_t cells = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cells + c]; }
};

SampleMatrix sample_replicates(const Grid& grid, const LevyModel& model,
                               std::uint64_t seed, std::size_t replicates,
                               unsigned threads = 1,
                               NegbinRoute route = NegbinRoute::compound);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error of prod_i <f_i, gamma>.
MomentEstimate empirical_joint_moment(const std::vector<RealFunction>& fs,
                                      const SampleMatrix& samples,
                                      const Grid& grid);

/// Sample covariance of the masses of two cells, with its standard error.
MomentEstimate empirical_covariance(const SampleMatrix& samples, std::size_t a,
                                    std::size_t b);

/// Empirical frequencies of the integer masses of one cell, indexed by n.
std::vector<double> empirical_pmf(const SampleMatrix& samples, std::size_t cell);

/// Total variation distance between an empirical pmf and the negbin pmf of
/// a cell with weight w, including the exact tail beyond the observed range.
double negbin_tv_distance(const std::vector<double>& empirical, double w,
                          double eta, double kappa);

/// Total variation distance between two empirical pmfs.
double tv_distance(const std::vector<double>& a, const std::vector<double>& b);

struct LaplaceCheck {
  double empirical = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  double gap = 0.0;
};

/// Closed form of E[exp(<f, gamma>)] for f <= 0.
double laplace_exact(const RealFunction& f, const LevyModel& model,
                     const Grid& grid);

LaplaceCheck laplace_check(const RealFunction& f, const LevyModel& model,
                           const Grid& grid, std::size_t nsamples,
                           std::uint64_t seed, unsigned threads = 1);

// Serialization of configurations.
std::string to_csv(const PointConfiguration& config);
nlohmann::json to_json(const PointConfiguration& config);

}  // namespace anyonfock

#endif  // ANYONFOCK_POINTPROC_HPP
