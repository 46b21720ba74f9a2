#pragma once

#include <array>
#include <memory>
#include <vector>

#include "common.hpp"

namespace loca {

using GridCell = std::array<Index, 2>;

// Orthonormal DCT-II matrix: entry (i, j) = sqrt(2/n) * k_i * cos(pi (2j+1) i / (2n)),
// k_0 = 1/sqrt(2), k_i = 1 otherwise. Rows are the basis functions, so M * M^T = I.
Matrix dct_matrix(Index n);

// Pair of shared DCT matrices for a p x q grid. One immutable copy per axis
// length is kept in a global cache and reused by every caller.
class DctBasis {
 public:
  static DctBasis get(Index rows, Index cols);

  const Matrix& row_basis() const { return *row_; }  // p x p
  const Matrix& col_basis() const { return *col_; }  // q x q
  Index rows() const { return row_->rows(); }
  Index cols() const { return col_->rows(); }

 private:
  DctBasis(std::shared_ptr<const Matrix> row, std::shared_ptr<const Matrix> col)
      : row_(std::move(row)), col_(std::move(col)) {}
  std::shared_ptr<const Matrix> row_;
  std::shared_ptr<const Matrix> col_;
};

// Forward 2-D DCT: C * W * D^T.
Matrix dct2(const Matrix& w, const DctBasis& basis);

// Inverse 2-D DCT: C^T * F * D. Exact inverse of dct2 under orthonormality.
Matrix idct2_dense(const Matrix& f, const DctBasis& basis);

// Places coefficients onto a zero p x q matrix; colliding cells accumulate.
Matrix scatter(std::span<const double> coeffs, std::span<const GridCell> cells, Index rows, Index cols);

// Sparse coefficient list with continuous grid locations; the carrier of the
// trainable spectral parameterization.
struct SparseSpectrum {
  Index rows = 0;
  Index cols = 0;
  std::vector<double> coeffs;
  std::vector<std::array<double, 2>> locations;  // continuous (row, col)
};

// Rounds each continuous location half-away-from-zero; no clamping, so a
// location outside the grid is an error.
GridCell round_cell(double row, double col);

// Inverse DCT of a sparse spectrum as a sum of rank-1 terms, O(B p q).
// Bit-compatible with idct2_dense(scatter(...)) to ~1e-13.
Matrix idct2_sparse(const SparseSpectrum& spectrum, const DctBasis& basis);
Matrix idct2_sparse_cells(std::span<const double> coeffs, std::span<const GridCell> cells,
                          const DctBasis& basis);

// FFT-backed transforms, O(pq log(pq)); match the matrix-product forms to 1e-8.
Matrix fast_dct2(const Matrix& w);
Matrix fast_idct2(const Matrix& f);

// Unitary 2-D DFT (scaling 1/sqrt(pq)); Parseval holds with constant 1, and
// real input yields a conjugate-symmetric spectrum.
CMatrix dft2(const Matrix& w);
CMatrix idft2(const CMatrix& f);

// True when F[i][j] == conj(F[(p-i) mod p][(q-j) mod q]) within tol.
bool is_conjugate_symmetric(const CMatrix& f, double tol);

// Extracts the real part, rejecting imaginary residue above tol.
Matrix real_part_checked(const CMatrix& f, double tol);

// Labels each DFT cell of a K x K grid: 0 at self-conjugate frequencies,
// +1 on the retained member of each conjugate pair, -1 on the redundant one.
class ReferenceMatrix {
 public:
  static ReferenceMatrix build(Index size);

  Index size() const { return cells_.rows(); }
  int at(Index i, Index j) const { return cells_(i, j); }
  const Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic>& cells() const { return cells_; }

 private:
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> cells_;
};

// Energy bookkeeping over the non-redundant half of a spectrum: redundant
// cells zeroed, retained pair cells doubled, self-conjugate cells counted
// once, so each matrix sums to the corresponding share of ||W||^2.
struct HalfMatrices {
  Matrix total;  // weighted |F|^2
  Matrix re;     // weighted Re(F)^2
  Matrix im;     // weighted Im(F)^2
};

HalfMatrices half_matrices(const CMatrix& f, const ReferenceMatrix& ref);

// Enumeration of the non-redundant half of a p x q DFT grid, cached per shape.
class ConjugateLayout {
 public:
  static const ConjugateLayout& get(Index rows, Index cols);

  const std::vector<GridCell>& retained() const { return retained_; }
  bool self_conjugate(std::size_t idx) const { return self_[idx] != 0; }
  Index retained_count() const { return static_cast<Index>(retained_.size()); }
  // One slot per real coefficient: 2 per paired cell, 1 per self-conjugate cell.
  Index slot_count() const { return slots_; }

 private:
  std::vector<GridCell> retained_;
  std::vector<unsigned char> self_;
  Index slots_ = 0;
};

}  // namespace loca
