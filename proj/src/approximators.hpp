#pragma once

#include <optional>
#include <vector>

#include "rng.hpp"
#include "transforms.hpp"

namespace loca {

// Parameter-budget accounting for a p x q update of rank r. n0 = (p+q)*r is
// the rank-r parameter count; the frequency budgets are n1 = n3 = n0/2 and
// n2 = 2*n0/3 (floor division throughout). n1 counts selected spectrum cells
// (locations are free for the random scheme), n3 counts individually selected
// real/imaginary slots, and n2 counts coefficient slots for the top-amplitude
// scheme: a selected cell stores a location index plus two coefficients, so
// the scheme keeps n2/2 cells.
struct BudgetSpec {
  Index p = 0;
  Index q = 0;
  Index r = 0;
  Index n0 = 0;
  Index n1 = 0;
  Index n2 = 0;
  Index n3 = 0;
  Index nd = 0;

  Index n2_cells() const { return n2 / 2; }

  static BudgetSpec from_rank(Index p, Index q, Index r);
};

// Per-method Monte Carlo aggregate of reconstruction errors.
struct ApproximationReport {
  std::string method;
  std::vector<double> trial_errors;
  double mean = 0.0;
  double se = 0.0;
  Index k = 0;
  Index r = 0;
  Index trials = 0;
};

// Rank-r truncated SVD reconstruction (the error-optimal rank-r approximant).
Matrix lowrank_approx(const Matrix& w, Index r);

// Tail sum of squared singular values past the first r; equals the rank-r
// reconstruction error.
double svd_tail_energy(std::span<const double> singular_values_desc, Index r);

// Keeps the full complex value at n1 uniformly random retained cells of the
// unitary DFT spectrum, mirrors conjugates, inverts. If `selected` is given
// it receives the chosen retained-cell indices (into ConjugateLayout).
Matrix fourier_random_approx(const Matrix& w, Index n1, Rng& rng,
                             std::vector<Index>* selected = nullptr);

// Keeps the n_cells retained cells with the largest half-matrix energy
// (ties broken by row then column), both coordinates per cell.
Matrix fourier_top_amplitude_approx(const Matrix& w, Index n_cells);

// Keeps the n_slots individually largest real/imaginary coordinates over the
// retained half (self-conjugate cells expose a single real slot).
Matrix fourier_top_coeff_approx(const Matrix& w, Index n_slots);

// Keeps the nd largest-magnitude DCT coefficients, zeroes the rest, inverts.
Matrix dct_top_approx(const Matrix& w, Index nd);

// Squared Frobenius distance ||w - w_hat||^2.
double reconstruction_error(const Matrix& w, const Matrix& w_hat);

// Closed-form expected retained energy E[K^2 - L] for uniform random
// selection of K*r retained cells: K^3 r / (K^2/2 + 2) for even K and
// K^3 r / ((K^2 + 1)/2) for odd K.
double expected_random_selection(Index k, Index r);

// Energy-route error identities used by the Monte Carlo harness; each equals
// the corresponding matrix-route reconstruction error by Parseval.
namespace energy {

// Weighted per-cell energies (the half-matrix values) over the retained half.
std::vector<double> retained_cell_energies(const CMatrix& f, const ConjugateLayout& layout);

// Individually selectable slot energies over the retained half.
std::vector<double> retained_slot_energies(const CMatrix& f, const ConjugateLayout& layout);

// Sum of the top n values of xs (xs is consumed).
double top_sum(std::vector<double>&& xs, Index n);

}  // namespace energy

}  // namespace loca
