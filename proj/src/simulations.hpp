#pragma once

#include <optional>
#include <string>
#include <vector>

#include "approximators.hpp"
#include "matrix_stats.hpp"

namespace loca {

struct MethodStats {
  std::string method;
  MeanStderr ratio;  // mean reconstruction error over K^2 (or expected total energy)
};

// One cell of the reconstruction-error ordering experiment: K x K standard
// Gaussian draws, all schemes evaluated per draw under the shared budget.
struct OrderingResult {
  Index k = 0;
  Index r = 0;
  Index trials = 0;
  MethodStats random_fourier;   // random retained-cell selection
  MethodStats lowrank;          // truncated SVD
  MethodStats top_amplitude;    // largest half-matrix cells
  MethodStats top_coeff;        // largest individual coordinates
  double m1_ratio = 0.0;        // 1 - M1/K^2 (chi-square order-sum bracket, upper error bound)
  double m2_ratio = 0.0;        // 1 - M2/K^2 (lower error bound)
  double m1_se = 0.0;
  double m2_se = 0.0;
  bool indeterminate = false;   // stderr unavailable (trials < 2)
  bool ordering_ok = false;     // strict chain with >= 2 combined-stderr separation
};

OrderingResult theorem1_cell(Index k, Index r, Index trials, std::uint64_t master_seed,
                             int workers);

// Monte Carlo check that top-coordinate DFT selection and top-magnitude DCT
// selection have equal expected error at equal budget.
struct Theorem2Result {
  Index k = 0;
  Index budget = 0;
  Index trials = 0;
  MeanStderr fourier_top_coeff;  // mean error (absolute)
  MeanStderr dct_top;
  double relative_gap = 0.0;     // |mean_f3 - mean_dct| / mean_dct (0 when both are 0)
};

Theorem2Result theorem2_check(Index k, Index budget, Index trials, std::uint64_t master_seed,
                              int workers);

// K x K matrix whose vectorized entries are N(0, rho * 1 1^T + I): a shared
// N(0,1) draw scaled by sqrt(rho) plus independent unit Gaussians.
Matrix sample_correlated_matrix(Index k, double rho, Rng& rng);

// Sweep over correlation strengths: per rho, mean relative errors of the
// rank-r truncation and the top-magnitude DCT scheme, both normalized by the
// expected total energy K^2 (1 + rho). The critical correlation rho_c is
// where the low-rank curve crosses below the i.i.d. DCT reference level
// (the correlated spike shifts both same-draw errors identically, so the
// crossing is defined against the rho = 0 reference).
struct NoniidCurvePoint {
  double rho = 0.0;
  MeanStderr lowrank;
  MeanStderr dct_top;
};

struct NoniidRankResult {
  Index r = 0;
  std::vector<NoniidCurvePoint> points;
  double dct_reference = 0.0;          // i.i.d. top-DCT mean ratio
  std::optional<double> rho_c;         // empty: no crossing within the grid
};

struct NoniidSweepResult {
  Index k = 0;
  Index trials = 0;
  std::vector<NoniidRankResult> ranks;
  bool iid_ordering_ok = false;  // at rho = 0 the DCT scheme beats low-rank
  bool monotone = false;         // rho_c strictly increases with r (all found)
};

NoniidSweepResult noniid_sweep(Index k, std::span<const Index> ranks,
                               std::span<const double> rho_grid, Index trials,
                               std::uint64_t master_seed, int workers);

}  // namespace loca
