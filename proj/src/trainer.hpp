#pragma once

#include <string>
#include <vector>

#include "rng.hpp"
#include "transforms.hpp"

namespace loca {

// Trainable sparse-spectrum parameterization: coefficients plus continuous
// grid locations, materialized through the inverse DCT of their rounded
// scatter. Locations are stored in index units (0 .. p-1).
struct SpectralAdapter {
  Index rows = 0;
  Index cols = 0;
  double alpha = 1.0;
  std::vector<double> coeffs;                    // init 0
  std::vector<std::array<double, 2>> locations;  // continuous (row, col)

  Index budget() const { return static_cast<Index>(coeffs.size()); }
};

// Rounds half-away-from-zero, then clamps into [0, rows-1] x [0, cols-1].
std::vector<GridCell> round_locations(std::span<const std::array<double, 2>> locations,
                                      Index rows, Index cols);

// alpha * inverse DCT of the rounded scatter.
Matrix materialize(const SpectralAdapter& param);

// Z = dct2 of the upstream gradient dL/dDeltaW; computed once per backward
// pass and indexed for every coefficient and location gradient.
Matrix spectrum_gradient(const Matrix& upstream, const DctBasis& basis);

// g_i = alpha * Z[l1_i, l2_i]; collided locations read the same cell.
std::vector<double> coeff_gradient(const SpectralAdapter& param, const Matrix& z);

// Central difference of Z along each axis scaled by alpha * a_i; one-sided at
// the grid boundary. Zero coefficients produce exactly zero gradients.
std::vector<std::array<double, 2>> location_gradient(const SpectralAdapter& param, const Matrix& z);

// Independent route for the same gradients: the explicit trace formula
// tr[G^T dDeltaW/dtheta] with difference matrices built from shifted
// scatters. Used as the oracle the Z path must match.
std::vector<double> coeff_gradient_direct(const SpectralAdapter& param, const Matrix& upstream);
std::vector<std::array<double, 2>> location_gradient_direct(const SpectralAdapter& param,
                                                            const Matrix& upstream);

// Plain gradient descent update (no weight decay).
void sgd_step(std::span<double> values, std::span<const double> grads, double lr);

// Regression task with a ground-truth sparse spectral middle layer:
// y = W3 * idct2(F2) * W1 * x with fixed full-rank outer layers.
struct ToyTask {
  Index dim = 6;
  Index n_samples = 5000;
  Matrix x;              // dim x n_samples, entries N(0, 20)
  Matrix y;              // dim x n_samples
  Matrix w1;             // fixed
  Matrix w3;             // fixed
  SparseSpectrum truth;  // 3 nonzero coefficients at distinct cells
  Matrix second_moment;  // x x^T / n
};

ToyTask build_toy_task(std::uint64_t seed);

struct AltSchedule {
  Index coeff_steps = 10;    // steps per coefficient phase
  Index loc_steps = 20;      // steps per location phase
  Index alternating_total = 0;  // steps spent alternating before freezing locations
  Index total_steps = 0;
  double lr_coeff = 0.0;
  double lr_loc = 0.0;
  // Rows per SGD step; 0 trains on the full batch. Minibatch noise is what
  // lets the rounded location dynamics escape cell-boundary equilibria; the
  // exact solution has zero per-sample residual, so found locations stay put.
  Index batch_size = 1;
  // Warm-restart schedule on the location rate: within each period the
  // multiplier decays geometrically from `loc_lr_peak` down to 1. High-rate
  // segments re-randomize unconverged configurations, low-rate segments let
  // captures settle. 0 disables the schedule (constant lr_loc).
  Index loc_lr_restart_period = 0;
  double loc_lr_peak = 8.0;
  // Re-initialize locations uniformly (and coefficients to zero) at each
  // restart boundary, turning the alternating window into a multi-start
  // search; the identified-component selection keeps the best start.
  bool restart_locations = false;
};

enum class Phase { coefficients, locations, coefficients_only };

const char* phase_name(Phase p);

struct LocationSnapshot {
  Index step = 0;
  std::vector<std::array<double, 2>> locations;
};

struct TrainerState {
  SpectralAdapter param;
  Index step = 0;
  Phase phase = Phase::coefficients;
  std::vector<double> loss_history;       // loss at the start of each step
  std::vector<Phase> phase_history;
  std::vector<LocationSnapshot> snapshots;
  double final_loss = 0.0;
};

// Alternating optimization of the adapter on the toy task. Locations are
// initialized uniformly over the grid from `rng`, which then drives the
// minibatch draws; coefficients start at zero. While alternating, every
// distinct rounded cell configuration the walk visits is scored by its exact
// least-squares training loss; the freeze at `alternating_total` keeps the
// best-scoring configuration (the identified components) and the remaining
// steps optimize coefficients only. loss_history records the per-step
// training loss, final_loss the full-batch loss. Aborts with Errc::diverged
// when the loss exceeds 1e6 x the initial loss.
TrainerState alternating_train(const ToyTask& task, const AltSchedule& schedule, Rng& rng);

// As above but from an explicit initial parameter (used by the ablation that
// keeps locations frozen: alternating_total = 0).
TrainerState alternating_train_from(const ToyTask& task, const AltSchedule& schedule,
                                    SpectralAdapter initial, Rng& rng);

// Mean squared error of the adapter on the task (mean over samples and dims).
double toy_loss(const ToyTask& task, const SpectralAdapter& param);

// Plain-text key-value checkpoint of the trainable state.
void save_checkpoint(const TrainerState& state, const std::string& path);
TrainerState load_checkpoint(const std::string& path);

}  // namespace loca
