#include "transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>

namespace loca {

namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const Matrix> cached_dct_axis(Index n) {
  static std::map<Index, std::shared_ptr<const Matrix>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto m = std::make_shared<const Matrix>(dct_matrix(n));
  cache.emplace(n, m);
  return m;
}

std::shared_ptr<const CMatrix> cached_dft_axis(Index n) {
  static std::map<Index, std::shared_ptr<const CMatrix>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CMatrix h(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index u = 0; u < n; ++u) {
    for (Index v = 0; v < n; ++v) {
      // exp(-2 pi i u v / n) with the product reduced mod n to keep the
      // argument small for large grids.
      const long long prod = static_cast<long long>(u) * static_cast<long long>(v) % n;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(prod) / static_cast<double>(n);
      h(u, v) = std::complex<double>(std::cos(angle), std::sin(angle)) * scale;
    }
  }
  auto out = std::make_shared<const CMatrix>(std::move(h));
  cache.emplace(n, out);
  return out;
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// FFTW r2r REDFT10/REDFT01 backs the fast path. Plan creation is serialized;
// execution runs on the caller's buffers.
void run_r2r_2d(Index rows, Index cols, fftw_r2r_kind kind, std::vector<double>& buf) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_r2r_2d(static_cast<int>(rows), static_cast<int>(cols), buf.data(), buf.data(),
                            kind, kind, FFTW_ESTIMATE);
  }
  if (plan == nullptr) fail(Errc::numeric, "fast transform: FFTW plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace

Matrix dct_matrix(Index n) {
  require(n >= 1, Errc::invalid_argument, "dct_matrix: n must be >= 1");
  Matrix m(n, n);
  const double base = std::sqrt(2.0 / static_cast<double>(n));
  const double k0 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) {
    const double ki = (i == 0) ? k0 : 1.0;
    for (Index j = 0; j < n; ++j) {
      const double angle =
          std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) * static_cast<double>(i) /
          (2.0 * static_cast<double>(n));
      m(i, j) = base * ki * std::cos(angle);
    }
  }
  return m;
}

DctBasis DctBasis::get(Index rows, Index cols) {
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "DctBasis: dims must be >= 1");
  return DctBasis(cached_dct_axis(rows), cached_dct_axis(cols));
}

Matrix dct2(const Matrix& w, const DctBasis& basis) {
  require(w.rows() == basis.rows() && w.cols() == basis.cols(), Errc::dimension_mismatch,
          "dct2: matrix does not match basis dims");
  Matrix f = basis.row_basis() * w * basis.col_basis().transpose();
  ensure_finite(f, "dct2");
  return f;
}

Matrix idct2_dense(const Matrix& f, const DctBasis& basis) {
  require(f.rows() == basis.rows() && f.cols() == basis.cols(), Errc::dimension_mismatch,
          "idct2_dense: matrix does not match basis dims");
  Matrix w = basis.row_basis().transpose() * f * basis.col_basis();
  ensure_finite(w, "idct2_dense");
  return w;
}

Matrix scatter(std::span<const double> coeffs, std::span<const GridCell> cells, Index rows, Index cols) {
  require(coeffs.size() == cells.size(), Errc::dimension_mismatch,
          "scatter: coefficient/location counts differ");
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "scatter: dims must be >= 1");
  Matrix out = Matrix::Zero(rows, cols);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto [r, c] = cells[i];
    require(r >= 0 && r < rows && c >= 0 && c < cols, Errc::out_of_bounds,
            "scatter: location out of bounds");
    out(r, c) += coeffs[i];
  }
  return out;
}

GridCell round_cell(double row, double col) {
  return GridCell{static_cast<Index>(std::round(row)), static_cast<Index>(std::round(col))};
}

Matrix idct2_sparse_cells(std::span<const double> coeffs, std::span<const GridCell> cells,
                          const DctBasis& basis) {
  require(coeffs.size() == cells.size(), Errc::dimension_mismatch,
          "idct2_sparse: coefficient/location counts differ");
  const Index rows = basis.rows();
  const Index cols = basis.cols();
  Matrix out = Matrix::Zero(rows, cols);
  const Matrix& c = basis.row_basis();
  const Matrix& d = basis.col_basis();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto [r, k] = cells[i];
    require(r >= 0 && r < rows && k >= 0 && k < cols, Errc::out_of_bounds,
            "idct2_sparse: location out of bounds");
    out.noalias() += coeffs[i] * (c.row(r).transpose() * d.row(k));
  }
  ensure_finite(out, "idct2_sparse");
  return out;
}

Matrix idct2_sparse(const SparseSpectrum& spectrum, const DctBasis& basis) {
  require(spectrum.rows == basis.rows() && spectrum.cols == basis.cols(), Errc::dimension_mismatch,
          "idct2_sparse: spectrum does not match basis dims");
  require(spectrum.coeffs.size() == spectrum.locations.size(), Errc::dimension_mismatch,
          "idct2_sparse: coefficient/location counts differ");
  std::vector<GridCell> cells(spectrum.locations.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    cells[i] = round_cell(spectrum.locations[i][0], spectrum.locations[i][1]);
  return idct2_sparse_cells(spectrum.coeffs, cells, basis);
}

Matrix fast_dct2(const Matrix& w) {
  const Index rows = w.rows();
  const Index cols = w.cols();
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "fast_dct2: dims must be >= 1");
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) buf[static_cast<std::size_t>(i * cols + j)] = w(i, j);
  run_r2r_2d(rows, cols, FFTW_REDFT10, buf);
  // REDFT10 is the unnormalized DCT-II (factor 2 per axis); rescale rows and
  // columns to the orthonormal convention.
  Matrix f(rows, cols);
  const double sr = 0.5 * std::sqrt(2.0 / static_cast<double>(rows));
  const double sc = 0.5 * std::sqrt(2.0 / static_cast<double>(cols));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < rows; ++i) {
    const double ri = sr * (i == 0 ? inv_sqrt2 : 1.0);
    for (Index j = 0; j < cols; ++j) {
      const double cj = sc * (j == 0 ? inv_sqrt2 : 1.0);
      f(i, j) = buf[static_cast<std::size_t>(i * cols + j)] * ri * cj;
    }
  }
  ensure_finite(f, "fast_dct2");
  return f;
}

Matrix fast_idct2(const Matrix& f) {
  const Index rows = f.rows();
  const Index cols = f.cols();
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "fast_idct2: dims must be >= 1");
  // Prescale from the orthonormal convention into REDFT01's expected input.
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  const double tr0 = 1.0 / std::sqrt(static_cast<double>(rows));
  const double tr = 1.0 / std::sqrt(2.0 * static_cast<double>(rows));
  const double tc0 = 1.0 / std::sqrt(static_cast<double>(cols));
  const double tc = 1.0 / std::sqrt(2.0 * static_cast<double>(cols));
  for (Index i = 0; i < rows; ++i) {
    const double ri = (i == 0) ? tr0 : tr;
    for (Index j = 0; j < cols; ++j) {
      const double cj = (j == 0) ? tc0 : tc;
      buf[static_cast<std::size_t>(i * cols + j)] = f(i, j) * ri * cj;
    }
  }
  run_r2r_2d(rows, cols, FFTW_REDFT01, buf);
  Matrix w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = buf[static_cast<std::size_t>(i * cols + j)];
  ensure_finite(w, "fast_idct2");
  return w;
}

CMatrix dft2(const Matrix& w) {
  const Index rows = w.rows();
  const Index cols = w.cols();
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "dft2: dims must be >= 1");
  const CMatrix& hr = *cached_dft_axis(rows);
  const CMatrix& hc = *cached_dft_axis(cols);
  CMatrix f = hr * w.cast<std::complex<double>>() * hc;
  return f;
}

CMatrix idft2(const CMatrix& f) {
  const Index rows = f.rows();
  const Index cols = f.cols();
  require(rows >= 1 && cols >= 1, Errc::invalid_argument, "idft2: dims must be >= 1");
  const CMatrix hr = cached_dft_axis(rows)->conjugate();
  const CMatrix hc = cached_dft_axis(cols)->conjugate();
  return hr * f * hc;
}

bool is_conjugate_symmetric(const CMatrix& f, double tol) {
  const Index rows = f.rows();
  const Index cols = f.cols();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const std::complex<double> mirror = f((rows - i) % rows, (cols - j) % cols);
      if (std::abs(f(i, j) - std::conj(mirror)) > tol) return false;
    }
  }
  return true;
}

Matrix real_part_checked(const CMatrix& f, double tol) {
  const double residue = f.imag().cwiseAbs().maxCoeff();
  require(residue <= tol, Errc::numeric, "real_part_checked: imaginary residue above tolerance");
  return f.real();
}

ReferenceMatrix ReferenceMatrix::build(Index size) {
  require(size >= 2, Errc::invalid_argument, "ReferenceMatrix: size must be >= 2");
  ReferenceMatrix out;
  out.cells_.resize(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      const Index pi = (size - i) % size;
      const Index pj = (size - j) % size;
      if (pi == i && pj == j) {
        out.cells_(i, j) = 0;  // self-conjugate frequency
      } else if (std::make_pair(i, j) < std::make_pair(pi, pj)) {
        out.cells_(i, j) = 1;  // retained member of the pair
      } else {
        out.cells_(i, j) = -1;  // reconstructed by conjugation
      }
    }
  }
  return out;
}

HalfMatrices half_matrices(const CMatrix& f, const ReferenceMatrix& ref) {
  require(f.rows() == f.cols(), Errc::dimension_mismatch, "half_matrices: spectrum must be square");
  require(f.rows() == ref.size(), Errc::dimension_mismatch,
          "half_matrices: reference matrix size mismatch");
  const Index n = f.rows();
  HalfMatrices out;
  out.re = Matrix::Zero(n, n);
  out.im = Matrix::Zero(n, n);
  out.total = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const int r = ref.at(i, j);
      const double weight = (r == 1) ? 2.0 : (r == 0 ? 1.0 : 0.0);
      const double re = f(i, j).real();
      const double im = f(i, j).imag();
      out.re(i, j) = weight * re * re;
      out.im(i, j) = weight * im * im;
      out.total(i, j) = out.re(i, j) + out.im(i, j);
    }
  }
  return out;
}

const ConjugateLayout& ConjugateLayout::get(Index rows, Index cols) {
  static std::map<std::pair<Index, Index>, std::unique_ptr<ConjugateLayout>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto key = std::make_pair(rows, cols);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto layout = std::make_unique<ConjugateLayout>();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index pi = (rows - i) % rows;
      const Index pj = (cols - j) % cols;
      if (pi == i && pj == j) {
        layout->retained_.push_back({i, j});
        layout->self_.push_back(1);
        layout->slots_ += 1;
      } else if (std::make_pair(i, j) < std::make_pair(pi, pj)) {
        layout->retained_.push_back({i, j});
        layout->self_.push_back(0);
        layout->slots_ += 2;
      }
    }
  }
  const ConjugateLayout& ref = *layout;
  cache.emplace(key, std::move(layout));
  return ref;
}

}  // namespace loca
