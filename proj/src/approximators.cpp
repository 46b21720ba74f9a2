#include "approximators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loca {

namespace {

struct RankedIndex {
  double value;
  Index row;
  Index col;
  int slot;  // 0 = real, 1 = imaginary; always 0 for cell-level rankings
};

// Stable deterministic ranking: by value descending, ties by (row, col, slot).
void rank_descending(std::vector<RankedIndex>& xs) {
  std::sort(xs.begin(), xs.end(), [](const RankedIndex& a, const RankedIndex& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.slot < b.slot;
  });
}

void mirror_into(CMatrix& spectrum, Index i, Index j, std::complex<double> value) {
  const Index rows = spectrum.rows();
  const Index cols = spectrum.cols();
  spectrum(i, j) = value;
  const Index pi = (rows - i) % rows;
  const Index pj = (cols - j) % cols;
  if (pi != i || pj != j) spectrum(pi, pj) = std::conj(value);
}

constexpr double kImagTol = 1e-10;

}  // namespace

BudgetSpec BudgetSpec::from_rank(Index p, Index q, Index r) {
  require(p >= 1 && q >= 1, Errc::invalid_argument, "BudgetSpec: dims must be >= 1");
  require(r >= 1 && r <= std::min(p, q), Errc::invalid_argument,
          "BudgetSpec: rank out of range");
  BudgetSpec b;
  b.p = p;
  b.q = q;
  b.r = r;
  b.n0 = (p + q) * r;
  b.n1 = b.n0 / 2;
  b.n2 = 2 * b.n0 / 3;
  b.n3 = b.n0 / 2;
  b.nd = b.n3;
  require(b.n1 >= 1 && b.n2 >= 1 && b.n3 >= 1, Errc::invalid_argument,
          "BudgetSpec: degenerate budget");
  const ConjugateLayout& layout = ConjugateLayout::get(p, q);
  require(b.n1 <= layout.retained_count(), Errc::invalid_argument,
          "BudgetSpec: n1 exceeds retained-cell count");
  require(b.n2_cells() <= layout.retained_count(), Errc::invalid_argument,
          "BudgetSpec: n2 exceeds retained capacity");
  require(b.n3 <= layout.slot_count(), Errc::invalid_argument,
          "BudgetSpec: n3 exceeds retained slot count");
  require(b.nd <= p * q, Errc::invalid_argument, "BudgetSpec: nd exceeds grid size");
  return b;
}

Matrix lowrank_approx(const Matrix& w, Index r) {
  require(r >= 1 && r <= std::min(w.rows(), w.cols()), Errc::invalid_argument,
          "lowrank_approx: rank out of range");
  Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix out = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
               svd.matrixV().leftCols(r).transpose();
  ensure_finite(out, "lowrank_approx");
  return out;
}

double svd_tail_energy(std::span<const double> singular_values_desc, Index r) {
  require(r >= 0 && static_cast<std::size_t>(r) <= singular_values_desc.size(),
          Errc::invalid_argument, "svd_tail_energy: r exceeds list length");
  double sum = 0.0;
  for (std::size_t i = static_cast<std::size_t>(r); i < singular_values_desc.size(); ++i)
    sum += singular_values_desc[i] * singular_values_desc[i];
  return sum;
}

namespace energy {

std::vector<double> retained_cell_energies(const CMatrix& f, const ConjugateLayout& layout) {
  std::vector<double> out(layout.retained().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto [r, c] = layout.retained()[i];
    const double weight = layout.self_conjugate(i) ? 1.0 : 2.0;
    out[i] = weight * std::norm(f(r, c));
  }
  return out;
}

std::vector<double> retained_slot_energies(const CMatrix& f, const ConjugateLayout& layout) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(layout.slot_count()));
  for (std::size_t i = 0; i < layout.retained().size(); ++i) {
    const auto [r, c] = layout.retained()[i];
    const double re = f(r, c).real();
    const double im = f(r, c).imag();
    if (layout.self_conjugate(i)) {
      out.push_back(re * re);  // imaginary slot structurally zero
    } else {
      out.push_back(2.0 * re * re);
      out.push_back(2.0 * im * im);
    }
  }
  return out;
}

double top_sum(std::vector<double>&& xs, Index n) {
  require(n >= 0 && static_cast<std::size_t>(n) <= xs.size(), Errc::invalid_argument,
          "top_sum: n exceeds list size");
  if (n == 0) return 0.0;
  auto nth = xs.begin() + static_cast<std::ptrdiff_t>(n);
  std::nth_element(xs.begin(), nth - 1, xs.end(), std::greater<double>());
  return std::accumulate(xs.begin(), nth, 0.0);
}

}  // namespace energy

Matrix fourier_random_approx(const Matrix& w, Index n1, Rng& rng, std::vector<Index>* selected) {
  const ConjugateLayout& layout = ConjugateLayout::get(w.rows(), w.cols());
  require(n1 >= 0 && n1 <= layout.retained_count(), Errc::invalid_argument,
          "fourier_random_approx: n1 exceeds retained-cell count");
  const CMatrix f = dft2(w);
  CMatrix kept = CMatrix::Zero(w.rows(), w.cols());
  auto picks = rng.sample_without_replacement(layout.retained_count(), n1);
  std::sort(picks.begin(), picks.end());
  for (std::int64_t idx : picks) {
    const auto [r, c] = layout.retained()[static_cast<std::size_t>(idx)];
    mirror_into(kept, r, c, f(r, c));
  }
  if (selected != nullptr) selected->assign(picks.begin(), picks.end());
  return real_part_checked(idft2(kept), kImagTol);
}

Matrix fourier_top_amplitude_approx(const Matrix& w, Index n_cells) {
  const ConjugateLayout& layout = ConjugateLayout::get(w.rows(), w.cols());
  require(n_cells >= 0 && n_cells <= layout.retained_count(), Errc::invalid_argument,
          "fourier_top_amplitude_approx: budget exceeds retained-cell count");
  const CMatrix f = dft2(w);
  std::vector<RankedIndex> ranked;
  ranked.reserve(layout.retained().size());
  for (std::size_t i = 0; i < layout.retained().size(); ++i) {
    const auto [r, c] = layout.retained()[i];
    const double weight = layout.self_conjugate(i) ? 1.0 : 2.0;
    ranked.push_back({weight * std::norm(f(r, c)), r, c, 0});
  }
  rank_descending(ranked);
  CMatrix kept = CMatrix::Zero(w.rows(), w.cols());
  for (Index i = 0; i < n_cells; ++i) {
    const auto& cell = ranked[static_cast<std::size_t>(i)];
    mirror_into(kept, cell.row, cell.col, f(cell.row, cell.col));
  }
  return real_part_checked(idft2(kept), kImagTol);
}

Matrix fourier_top_coeff_approx(const Matrix& w, Index n_slots) {
  const ConjugateLayout& layout = ConjugateLayout::get(w.rows(), w.cols());
  require(n_slots >= 0 && n_slots <= layout.slot_count(), Errc::invalid_argument,
          "fourier_top_coeff_approx: budget exceeds slot count");
  const CMatrix f = dft2(w);
  std::vector<RankedIndex> ranked;
  ranked.reserve(static_cast<std::size_t>(layout.slot_count()));
  for (std::size_t i = 0; i < layout.retained().size(); ++i) {
    const auto [r, c] = layout.retained()[i];
    const double re = f(r, c).real();
    const double im = f(r, c).imag();
    if (layout.self_conjugate(i)) {
      ranked.push_back({re * re, r, c, 0});
    } else {
      ranked.push_back({2.0 * re * re, r, c, 0});
      ranked.push_back({2.0 * im * im, r, c, 1});
    }
  }
  rank_descending(ranked);
  // Assemble kept coordinates per cell, then mirror once.
  CMatrix kept = CMatrix::Zero(w.rows(), w.cols());
  for (Index i = 0; i < n_slots; ++i) {
    const auto& slot = ranked[static_cast<std::size_t>(i)];
    const std::complex<double> value = f(slot.row, slot.col);
    std::complex<double> partial = kept(slot.row, slot.col);
    if (slot.slot == 0)
      partial = std::complex<double>(value.real(), partial.imag());
    else
      partial = std::complex<double>(partial.real(), value.imag());
    mirror_into(kept, slot.row, slot.col, partial);
  }
  return real_part_checked(idft2(kept), kImagTol);
}

Matrix dct_top_approx(const Matrix& w, Index nd) {
  require(nd >= 0 && nd <= w.rows() * w.cols(), Errc::invalid_argument,
          "dct_top_approx: budget out of range");
  const DctBasis basis = DctBasis::get(w.rows(), w.cols());
  const Matrix f = dct2(w, basis);
  std::vector<RankedIndex> ranked;
  ranked.reserve(static_cast<std::size_t>(w.rows() * w.cols()));
  for (Index i = 0; i < f.rows(); ++i)
    for (Index j = 0; j < f.cols(); ++j) ranked.push_back({std::abs(f(i, j)), i, j, 0});
  rank_descending(ranked);
  Matrix kept = Matrix::Zero(f.rows(), f.cols());
  for (Index i = 0; i < nd; ++i) {
    const auto& cell = ranked[static_cast<std::size_t>(i)];
    kept(cell.row, cell.col) = f(cell.row, cell.col);
  }
  return idct2_dense(kept, basis);
}

double reconstruction_error(const Matrix& w, const Matrix& w_hat) {
  require_same_shape(w, w_hat, "reconstruction_error");
  return (w - w_hat).squaredNorm();
}

double expected_random_selection(Index k, Index r) {
  require(k >= 2, Errc::invalid_argument, "expected_random_selection: K must be >= 2");
  require(r >= 1, Errc::invalid_argument, "expected_random_selection: r must be >= 1");
  const double kd = static_cast<double>(k);
  const double rd = static_cast<double>(r);
  const double retained = (k % 2 == 0) ? (kd * kd / 2.0 + 2.0) : ((kd * kd + 1.0) / 2.0);
  return kd * kd * kd * rd / retained;
}

}  // namespace loca
