#pragma once

#include <utility>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace loca {

// Spectrum of the normalized correlation matrix (1/p) W^T W against the
// Marchenko-Pastur support implied by the aspect ratio and element stdev.
struct EsdReport {
  std::vector<double> eigenvalues;  // descending, clamped at 0
  double q_ratio = 0.0;             // p / q
  double sigma = 0.0;               // entrywise sample stdev of W
  double mp_lower = 0.0;
  double mp_upper = 0.0;
  double outside_mass = 0.0;        // fraction of eigenvalue mass outside [lower, upper]
};

EsdReport esd(const Matrix& w);

// MP support bounds sigma^2 (1 -+ 1/sqrt(Q))^2 for Q >= 1.
std::pair<double, double> mp_support(double q_ratio, double sigma);

// T = (sum of eigenvalues outside [lower, upper]) / (sum of all eigenvalues).
double mp_outside_mass(std::span<const double> eigenvalues, double lower, double upper);

// Binned total variation between the empirical distribution of `samples` and
// N(mu, sigma^2): `bins` equal-width bins over mu +- 6 sigma plus two
// overflow bins.
double tv_distance(std::span<const double> samples, double mu, double sigma, int bins);

struct NormalityConfig {
  std::int64_t reference_samples = 100000;  // size of the reference set
  double sigma_perturb = 1e-5;
  int accepted_distributions = 100;
  int sets_per_distribution = 10;
  double epsilon = 1e-3;       // acceptance threshold on the TV to the reference
  int bins = 200;
  std::int64_t max_attempts = 10000;
};

struct NormalityReport {
  double statistic = 0.0;  // TV of the observed entries to the reference set
  double p_value = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> null_samples;  // accepted_distributions x sets_per_distribution
};

// Bootstrap-style calibration of the binned TV statistic: accepts perturbed
// copies of a Gaussian reference set, draws same-size point sets from them to
// form the null distribution, and locates the observed statistic's percentile.
NormalityReport normality_test(const Matrix& w, const NormalityConfig& config, Rng& rng);

// Monte Carlo estimate of E[sum of the topN largest draws] from a mixed
// chi-square ensemble given as (count, dof) blocks.
MeanStderr chi_square_order_sum(std::span<const std::pair<Index, int>> pattern, Index top_n,
                                Index trials, Rng& rng);

// Mean-variance bound mu + sigma * sqrt((n - l) / l) on the expectation of
// the l-th largest of n i.i.d. draws.
double order_stat_upper_bound(double mu, double sigma, Index n, Index l);

// Monte Carlo mean of lambda_max(W^T W) / K over K x K standard Gaussian draws.
MeanStderr wishart_lmax_ratio(Index k, Index trials, Rng& rng);

}  // namespace loca
