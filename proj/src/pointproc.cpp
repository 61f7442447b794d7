#include "anyonfock/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace anyonfock {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// sum_{k>=1} k^m p^k = p A_m(p) / (1-p)^(m+1), A_m the Eulerian polynomial.
double polylog_negative(int m, double p) {
  std::vector<double> row{1.0};  // Eulerian numbers A(m, i), i = 0..m-1
  for (int n = 2; n <= m; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      if (i < n - 1) v += (i + 1) * row[static_cast<std::size_t>(i)];
      if (i > 0) v += (n - i) * row[static_cast<std::size_t>(i - 1)];
      next[static_cast<std::size_t>(i)] = v;
    }
    row = std::move(next);
  }
  double poly = 0.0;
  if (m == 0) {
    poly = 1.0;
  } else {
    for (std::size_t i = row.size(); i-- > 0;) poly = poly * p + row[i];
  }
  return p * poly / std::pow(1.0 - p, m + 1);
}

void check_grid_function(const RealFunction& f, const Grid& grid, const char* where) {
  if (f.size() != grid.site_count()) {
    std::ostringstream msg;
    msg << where << ": function has " << f.size() << " values, expected "
        << grid.site_count();
    throw std::invalid_argument(msg.str());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(LevyKind kind) {
  switch (kind) {
    case LevyKind::poisson: return "poisson";
    case LevyKind::negbin: return "negbin";
    case LevyKind::gamma: return "gamma";
  }
  return "unknown";
}

LevyKind parse_levy_kind(const std::string& name) {
  if (name == "poisson") return LevyKind::poisson;
  if (name == "negbin") return LevyKind::negbin;
  if (name == "gamma") return LevyKind::gamma;
  throw std::invalid_argument("unknown Levy kind '" + name + "'");
}

LevyModel build_levy(LevyKind kind, double eta, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("build_levy: kappa must be positive");
  }
  LevyModel model;
  model.kind = kind;
  model.eta = eta;
  model.kappa = kappa;
  switch (kind) {
    case LevyKind::poisson:
      model.atoms = {{1.0, kappa * kappa}};
      model.atom_cdf = {1.0};
      model.total_mass = kappa * kappa;
      break;
    case LevyKind::negbin: {
      if (!(eta > 0.0)) throw std::invalid_argument("build_levy: negbin needs eta > 0");
      const double p = eta / (eta + 1.0 / (kappa * kappa));
      model.p = p;
      model.total_mass = -std::log1p(-p) / eta;
      double kept = 0.0;
      for (int k = 1;; ++k) {
        const double mass = std::pow(p, k) / (eta * k);
        model.atoms.push_back({static_cast<double>(k), mass});
        kept += mass;
        // Tail bound: sum_{j>k} p^j / (eta j) <= p^(k+1) / (eta (k+1) (1-p)).
        const double tail = std::pow(p, k + 1) / (eta * (k + 1) * (1.0 - p));
        if (tail <= kLevyTailTolerance * model.total_mass) break;
        if (k > 10'000'000) throw std::invalid_argument("build_levy: atom list too long");
      }
      model.truncated_mass = std::max(0.0, model.total_mass - kept);
      double acc = 0.0;
      for (const auto& a : model.atoms) {
        acc += a.mass;
        model.atom_cdf.push_back(acc / kept);
      }
      model.atom_cdf.back() = 1.0;
      break;
    }
    case LevyKind::gamma:
      if (!(eta > 0.0)) throw std::invalid_argument("build_levy: gamma needs eta > 0");
      model.total_mass = std::numeric_limits<double>::infinity();
      model.infinite_activity = true;
      break;
  }
  return model;
}

double levy_moment(const LevyModel& model, int j) {
  if (j < 1) throw std::invalid_argument("levy_moment: order must be >= 1");
  double m = 0.0;
  switch (model.kind) {
    case LevyKind::poisson:
      m = model.kappa * model.kappa;
      break;
    case LevyKind::negbin:
      m = polylog_negative(j - 1, model.p) / model.eta;
      break;
    case LevyKind::gamma:
      m = factorial(j - 1) * std::pow(model.eta, 0.5 * j - 1.0);
      break;
  }
  if (!std::isfinite(m)) throw std::overflow_error("levy_moment: moment overflow");
  return m;
}

std::vector<std::vector<std::vector<int>>> set_partitions(int n) {
  if (n < 0) throw std::invalid_argument("set_partitions: negative size");
  std::vector<std::vector<std::vector<int>>> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  // Restricted growth strings a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  while (true) {
    int blocks = 0;
    for (int v : a) blocks = std::max(blocks, v + 1);
    std::vector<std::vector<int>> part(static_cast<std::size_t>(blocks));
    for (int i = 0; i < n; ++i) part[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])].push_back(i);
    out.push_back(std::move(part));

    int i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int k = 0; k < i; ++k) prefix_max = std::max(prefix_max, a[static_cast<std::size_t>(k)]);
      if (a[static_cast<std::size_t>(i)] <= prefix_max) {
        ++a[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) a[static_cast<std::size_t>(k)] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

double exact_joint_moment(const std::vector<RealFunction>& fs,
                          const LevyModel& model, const Grid& grid) {
  const std::size_t n = fs.size();
  if (n > kMaxJointMomentOrder) {
    std::ostringstream msg;
    msg << "exact_joint_moment: n = " << n << " exceeds " << kMaxJointMomentOrder;
    throw std::invalid_argument(msg.str());
  }
  for (const auto& f : fs) check_grid_function(f, grid, "exact_joint_moment");
  std::vector<double> moments(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) moments[j] = levy_moment(model, static_cast<int>(j));

  double total = 0.0;
  for (const auto& partition : set_partitions(static_cast<int>(n))) {
    double term = 1.0;
    for (const auto& block : partition) {
      double integral = 0.0;
      for (std::size_t x = 0; x < grid.site_count(); ++x) {
        double v = grid.site_weight(x);
        for (int i : block) v *= fs[static_cast<std::size_t>(i)][x];
        integral += v;
      }
      term *= integral * moments[block.size()];
    }
    total += term;
  }
  return total;
}

double negbin_pmf(long n, double w, double eta, double kappa) {
  if (n < 0) return 0.0;
  if (!(w > 0.0) || !(eta > 0.0) || !(kappa > 0.0)) {
    throw std::invalid_argument("negbin_pmf: w, eta and kappa must be positive");
  }
  const double r = w / eta;
  const double k2e = kappa * kappa * eta;
  const double p = k2e / (1.0 + k2e);
  const double nd = static_cast<double>(n);
  const double log_pmf = -r * std::log1p(k2e) + nd * std::log(p) +
                         std::lgamma(r + nd) - std::lgamma(r) - std::lgamma(nd + 1.0);
  return std::exp(log_pmf);
}

// ---------------------------------------------------------------------------

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate) {
  std::uint64_t key = splitmix(seed);
  key = splitmix(key ^ splitmix(cell ^ 0xA0761D6478BD642Full));
  key = splitmix(key ^ splitmix(replicate ^ 0xE7037ED1A0B428DBull));
  state_ = key;
}

StreamRng::result_type StreamRng::operator()() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double StreamRng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double sample_cell(const LevyModel& model, double w, StreamRng& rng, NegbinRoute route) {
  switch (model.kind) {
    case LevyKind::poisson: {
      std::poisson_distribution<long> draw(model.kappa * model.kappa * w);
      return static_cast<double>(draw(rng));
    }
    case LevyKind::negbin: {
      if (route == NegbinRoute::direct) {
        // Gamma-Poisson mixture with r = w/eta and odds p/(1-p) = eta kappa^2.
        const double r = w / model.eta;
        std::gamma_distribution<double> mix(r, model.p / (1.0 - model.p));
        const double rate = mix(rng);
        if (rate <= 0.0) return 0.0;
        std::poisson_distribution<long> draw(rate);
        return static_cast<double>(draw(rng));
      }
      std::poisson_distribution<long> count(w * model.total_mass);
      const long jumps = count(rng);
      double total = 0.0;
      for (long i = 0; i < jumps; ++i) {
        const double u = rng.uniform();
        auto it = std::upper_bound(model.atom_cdf.begin(), model.atom_cdf.end(), u);
        if (it == model.atom_cdf.end()) --it;
        total += model.atoms[static_cast<std::size_t>(it - model.atom_cdf.begin())].size;
      }
      return total;
    }
    case LevyKind::gamma: {
      std::gamma_distribution<double> draw(w / model.eta, std::sqrt(model.eta));
      return draw(rng);
    }
  }
  return 0.0;
}

PointConfiguration sample(const Grid& grid, const LevyModel& model,
                          std::uint64_t seed, std::uint64_t replicate,
                          NegbinRoute route) {
  PointConfiguration config;
  config.kind = model.kind;
  config.seed = seed;
  config.replicate = replicate;
  config.route = route;
  config.masses.resize(grid.site_count());
  for (std::size_t c = 0; c < grid.site_count(); ++c) {
    StreamRng rng(seed, c, replicate);
    config.masses[c] = sample_cell(model, grid.site_weight(c), rng, route);
  }
  return config;
}

SampleMatrix sample_replicates(const Grid& grid, const LevyModel& model,
                               std::uint64_t seed, std::size_t replicates,
                               unsigned threads, NegbinRoute route) {
  SampleMatrix out;
  out.replicates = replicates;
  out.cells = grid.site_count();
  out.values.resize(replicates * out.cells);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < out.cells; ++c) {
        StreamRng rng(seed, c, r);
        out.values[r * out.cells + c] = sample_cell(model, grid.site_weight(c), rng, route);
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || replicates < 2 * threads) {
    work(0, replicates);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (replicates + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(replicates, t * chunk);
    const std::size_t end = std::min(replicates, begin + chunk);
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return out;
}

MomentEstimate empirical_joint_moment(const std::vector<RealFunction>& fs,
                                      const SampleMatrix& samples,
                                      const Grid& grid) {
  if (samples.cells != grid.site_count()) {
    throw std::invalid_argument("empirical_joint_moment: sample width does not match the grid");
  }
  if (samples.replicates < 2) {
    throw std::invalid_argument("empirical_joint_moment: need at least two samples");
  }
  for (const auto& f : fs) check_grid_function(f, grid, "empirical_joint_moment");
  // Welford accumulation in replicate order.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t r = 0; r < samples.replicates; ++r) {
    double prod = 1.0;
    for (const auto& f : fs) {
      double pairing = 0.0;
      for (std::size_t c = 0; c < samples.cells; ++c) pairing += f[c] * samples.at(r, c);
      prod *= pairing;
    }
    const double delta = prod - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (prod - mean);
  }
  const double n = static_cast<double>(samples.replicates);
  return MomentEstimate{mean, std::sqrt(m2 / (n - 1.0) / n)};
}

MomentEstimate empirical_covariance(const SampleMatrix& samples, std::size_t a,
                                    std::size_t b) {
  if (a >= samples.cells || b >= samples.cells) {
    throw std::invalid_argument("empirical_covariance: cell out of range");
  }
  const std::size_t n = samples.replicates;
  if (n < 2) throw std::invalid_argument("empirical_covariance: need at least two samples");
  double ma = 0.0, mb = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    ma += samples.at(r, a);
    mb += samples.at(r, b);
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double v = (samples.at(r, a) - ma) * (samples.at(r, b) - mb);
    const double delta = v - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (v - mean);
  }
  const double nd = static_cast<double>(n);
  return MomentEstimate{mean * nd / (nd - 1.0), std::sqrt(m2 / (nd - 1.0) / nd)};
}

std::vector<double> empirical_pmf(const SampleMatrix& samples, std::size_t cell) {
  if (cell >= samples.cells) throw std::invalid_argument("empirical_pmf: cell out of range");
  std::vector<double> counts;
  for (std::size_t r = 0; r < samples.replicates; ++r) {
    const double v = samples.at(r, cell);
    if (v < 0.0 || v != std::floor(v)) {
      throw std::invalid_argument("empirical_pmf: masses are not integers");
    }
    const auto k = static_cast<std::size_t>(v);
    if (k >= counts.size()) counts.resize(k + 1, 0.0);
    counts[k] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(samples.replicates);
  return counts;
}

double negbin_tv_distance(const std::vector<double>& empirical, double w,
                          double eta, double kappa) {
  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t k = 0; k < empirical.size(); ++k) {
    const double exact = negbin_pmf(static_cast<long>(k), w, eta, kappa);
    covered += exact;
    tv += std::abs(empirical[k] - exact);
  }
  tv += std::max(0.0, 1.0 - covered);
  return 0.5 * tv;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double tv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k < a.size() ? a[k] : 0.0;
    const double y = k < b.size() ? b[k] : 0.0;
    tv += std::abs(x - y);
  }
  return 0.5 * tv;
}

double laplace_exact(const RealFunction& f, const LevyModel& model, const Grid& grid) {
  check_grid_function(f, grid, "laplace_exact");
  double exponent = 0.0;
  for (std::size_t x = 0; x < grid.site_count(); ++x) {
    if (f[x] > 0.0) throw std::invalid_argument("laplace_check: f must be nonpositive");
    const double w = grid.site_weight(x);
    switch (model.kind) {
      case LevyKind::poisson:
        exponent += w * model.kappa * model.kappa * std::expm1(f[x]);
        break;
      case LevyKind::negbin: {
        double s = 0.0;
        for (const auto& a : model.atoms) s += std::expm1(a.size * f[x]) * a.mass;
        exponent += w * s;
        break;
      }
      case LevyKind::gamma:
        exponent -= w * std::log1p(-std::sqrt(model.eta) * f[x]) / model.eta;
        break;
    }
  }
  return std::exp(exponent);
}

LaplaceCheck laplace_check(const RealFunction& f, const LevyModel& model,
                           const Grid& grid, std::size_t nsamples,
                           std::uint64_t seed, unsigned threads) {
  LaplaceCheck out;
  out.exact = laplace_exact(f, model, grid);
  if (nsamples < 2) throw std::invalid_argument("laplace_check: need at least two samples");
  const SampleMatrix samples = sample_replicates(grid, model, seed, nsamples, threads);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < nsamples; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < samples.cells; ++c) s += f[c] * samples.at(r, c);
    const double v = std::exp(s);
    const double delta = v - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(nsamples);
  out.empirical = mean;
  out.std_error = std::sqrt(m2 / (n - 1.0) / n);
  out.gap = std::abs(out.empirical - out.exact);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_csv(const PointConfiguration& config) {
  std::string out = "cell_index,mass\n";
  for (std::size_t c = 0; c < config.masses.size(); ++c) {
    out += std::to_string(c) + "," + format_double(config.masses[c]) + "\n";
  }
  return out;
}

nlohmann::json to_json(const PointConfiguration& config) {
  nlohmann::json j;
  j["kind"] = to_string(config.kind);
  j["masses"] = config.masses;
  j["seed"] = config.seed;
  j["replicate"] = config.replicate;
  j["route"] = config.route == NegbinRoute::compound ? "compound" : "direct";
  return j;
}

}  // namespace anyonfock
