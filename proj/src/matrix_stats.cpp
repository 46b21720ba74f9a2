#include "matrix_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loca {

namespace {

double gaussian_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

double sample_stdev(const Matrix& w) {
  const double n = static_cast<double>(w.size());
  const double mean = w.mean();
  const double ss = (w.array() - mean).square().sum();
  return std::sqrt(ss / (n - 1.0));
}

// Fixed binning over mu +- 6 sigma with two overflow bins; used both for the
// analytic-Gaussian TV and for empirical-vs-reference comparisons.
class Binning {
 public:
  Binning(double mu, double sigma, int bins) : mu_(mu), sigma_(sigma), bins_(bins) {
    lo_ = mu - 6.0 * sigma;
    hi_ = mu + 6.0 * sigma;
    width_ = (hi_ - lo_) / static_cast<double>(bins);
  }

  int total_bins() const { return bins_ + 2; }

  int bin_of(double x) const {
    if (x < lo_) return 0;
    if (x >= hi_) return bins_ + 1;
    int b = static_cast<int>((x - lo_) / width_);
    if (b >= bins_) b = bins_ - 1;  // guard the hi boundary against rounding
    return b + 1;
  }

  std::vector<double> empirical_mass(std::span<const double> xs) const {
    std::vector<double> mass(static_cast<std::size_t>(total_bins()), 0.0);
    const double unit = 1.0 / static_cast<double>(xs.size());
    for (double x : xs) mass[static_cast<std::size_t>(bin_of(x))] += unit;
    return mass;
  }

  std::vector<double> gaussian_mass() const {
    std::vector<double> mass(static_cast<std::size_t>(total_bins()), 0.0);
    mass[0] = gaussian_cdf(lo_, mu_, sigma_);
    for (int b = 0; b < bins_; ++b) {
      const double a = lo_ + width_ * b;
      const double c = lo_ + width_ * (b + 1);
      mass[static_cast<std::size_t>(b + 1)] =
          gaussian_cdf(c, mu_, sigma_) - gaussian_cdf(a, mu_, sigma_);
    }
    mass[static_cast<std::size_t>(bins_ + 1)] = 1.0 - gaussian_cdf(hi_, mu_, sigma_);
    return mass;
  }

 private:
  double mu_, sigma_;
  int bins_;
  double lo_ = 0.0, hi_ = 0.0, width_ = 0.0;
};

double tv_between(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace

EsdReport esd(const Matrix& w) {
  const Index p = w.rows();
  const Index q = w.cols();
  require(p >= q && q >= 2, Errc::invalid_argument, "esd: need p >= q >= 2");
  EsdReport report;
  report.q_ratio = static_cast<double>(p) / static_cast<double>(q);
  report.sigma = sample_stdev(w);
  require(report.sigma > 0.0, Errc::numeric, "esd: degenerate entry stdev");
  Matrix corr = (w.transpose() * w) / static_cast<double>(p);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(corr, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, Errc::numeric, "esd: eigensolve failed");
  report.eigenvalues.resize(static_cast<std::size_t>(q));
  for (Index i = 0; i < q; ++i) {
    // (1/p) W^T W is PSD; clamp the solver's tiny negative round-off.
    report.eigenvalues[static_cast<std::size_t>(q - 1 - i)] =
        std::max(0.0, solver.eigenvalues()(i));
  }
  auto [lower, upper] = mp_support(report.q_ratio, report.sigma);
  report.mp_lower = lower;
  report.mp_upper = upper;
  report.outside_mass = mp_outside_mass(report.eigenvalues, lower, upper);
  return report;
}

std::pair<double, double> mp_support(double q_ratio, double sigma) {
  require(q_ratio >= 1.0, Errc::invalid_argument, "mp_support: Q must be >= 1");
  require(sigma > 0.0, Errc::invalid_argument, "mp_support: sigma must be > 0");
  const double root = 1.0 / std::sqrt(q_ratio);
  const double s2 = sigma * sigma;
  const double lower = s2 * (1.0 - root) * (1.0 - root);
  const double upper = s2 * (1.0 + root) * (1.0 + root);
  return {lower, upper};
}

double mp_outside_mass(std::span<const double> eigenvalues, double lower, double upper) {
  require(!eigenvalues.empty(), Errc::invalid_argument, "mp_outside_mass: empty eigenvalue list");
  double total = 0.0;
  double outside = 0.0;
  for (double lambda : eigenvalues) {
    total += lambda;
    if (lambda < lower || lambda > upper) outside += lambda;
  }
  require(total > 0.0, Errc::numeric, "mp_outside_mass: all-zero eigenvalues");
  return outside / total;
}

double tv_distance(std::span<const double> samples, double mu, double sigma, int bins) {
  require(samples.size() >= 2, Errc::invalid_argument, "tv_distance: need >= 2 samples");
  require(sigma > 0.0, Errc::invalid_argument, "tv_distance: sigma must be > 0");
  require(bins >= 1, Errc::invalid_argument, "tv_distance: bins must be >= 1");
  Binning binning(mu, sigma, bins);
  return tv_between(binning.empirical_mass(samples), binning.gaussian_mass());
}

NormalityReport normality_test(const Matrix& w, const NormalityConfig& config, Rng& rng) {
  require(w.size() >= 2, Errc::invalid_argument, "normality_test: matrix too small");
  const double mu = w.mean();
  const double sigma = sample_stdev(w);
  require(sigma > 1e-12, Errc::numeric, "normality_test: degenerate entry stdev");

  Binning binning(mu, sigma, config.bins);

  std::vector<double> reference(static_cast<std::size_t>(config.reference_samples));
  for (double& x : reference) x = rng.gaussian(mu, sigma);
  const std::vector<double> reference_mass = binning.empirical_mass(reference);

  const std::size_t set_size = static_cast<std::size_t>(w.size());
  NormalityReport report;
  report.epsilon = config.epsilon;
  report.mu = mu;
  report.sigma = sigma;
  report.null_samples.reserve(static_cast<std::size_t>(config.accepted_distributions) *
                              static_cast<std::size_t>(config.sets_per_distribution));

  std::vector<double> perturbed(reference.size());
  std::vector<double> set(set_size);
  int accepted = 0;
  std::int64_t attempts = 0;
  while (accepted < config.accepted_distributions) {
    require(attempts < config.max_attempts, Errc::numeric,
            "normality_test: perturbation acceptance budget exhausted (epsilon too small)");
    ++attempts;
    for (std::size_t i = 0; i < reference.size(); ++i)
      perturbed[i] = reference[i] + rng.gaussian(0.0, config.sigma_perturb);
    const double tv = tv_between(binning.empirical_mass(perturbed), reference_mass);
    if (tv >= config.epsilon) continue;
    ++accepted;
    for (int s = 0; s < config.sets_per_distribution; ++s) {
      for (std::size_t i = 0; i < set_size; ++i) {
        const auto pick = static_cast<std::size_t>(
            rng.uniform_index(static_cast<std::int64_t>(perturbed.size())));
        set[i] = perturbed[pick];
      }
      report.null_samples.push_back(tv_between(binning.empirical_mass(set), reference_mass));
    }
  }

  std::vector<double> observed(set_size);
  for (Index i = 0; i < w.size(); ++i) observed[static_cast<std::size_t>(i)] = w(i);
  report.statistic = tv_between(binning.empirical_mass(observed), reference_mass);

  std::size_t at_least = 0;
  for (double t : report.null_samples)
    if (t >= report.statistic) ++at_least;
  report.p_value = static_cast<double>(at_least) / static_cast<double>(report.null_samples.size());
  return report;
}

MeanStderr chi_square_order_sum(std::span<const std::pair<Index, int>> pattern, Index top_n,
                                Index trials, Rng& rng) {
  Index total = 0;
  for (const auto& [count, dof] : pattern) {
    require(count >= 0 && dof >= 1, Errc::invalid_argument, "chi_square_order_sum: bad pattern");
    total += count;
  }
  require(top_n >= 0 && top_n <= total, Errc::invalid_argument,
          "chi_square_order_sum: topN exceeds total count");
  require(trials >= 1, Errc::invalid_argument, "chi_square_order_sum: trials must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(trials));
  std::vector<double> draws(static_cast<std::size_t>(total));
  for (Index t = 0; t < trials; ++t) {
    std::size_t at = 0;
    for (const auto& [count, dof] : pattern)
      for (Index i = 0; i < count; ++i) draws[at++] = rng.chi_square(dof);
    std::vector<double> copy = draws;
    double sum = 0.0;
    if (top_n > 0) {
      auto nth = copy.begin() + static_cast<std::ptrdiff_t>(top_n);
      std::nth_element(copy.begin(), nth - 1, copy.end(), std::greater<double>());
      sum = std::accumulate(copy.begin(), nth, 0.0);
    }
    sums[static_cast<std::size_t>(t)] = sum;
  }
  return mean_stderr(sums);
}

double order_stat_upper_bound(double mu, double sigma, Index n, Index l) {
  require(l >= 1 && l <= n, Errc::invalid_argument, "order_stat_upper_bound: need 1 <= l <= n");
  return mu + sigma * std::sqrt(static_cast<double>(n - l) / static_cast<double>(l));
}

MeanStderr wishart_lmax_ratio(Index k, Index trials, Rng& rng) {
  require(k >= 16, Errc::invalid_argument, "wishart_lmax_ratio: K must be >= 16");
  require(trials >= 1, Errc::invalid_argument, "wishart_lmax_ratio: trials must be >= 1");
  std::vector<double> ratios(static_cast<std::size_t>(trials));
  Matrix w(k, k);
  for (Index t = 0; t < trials; ++t) {
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) w(i, j) = rng.gaussian();
    Matrix gram = w.transpose() * w;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, Errc::numeric, "wishart_lmax_ratio: eigensolve failed");
    ratios[static_cast<std::size_t>(t)] = solver.eigenvalues().maxCoeff() / static_cast<double>(k);
  }
  return mean_stderr(ratios);
}

}  // namespace loca
