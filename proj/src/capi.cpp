#include "loca/loca.h"

#include <cstring>
#include <string>

#include "approximators.hpp"
#include "experiments.hpp"
#include "matrix_stats.hpp"
#include "simulations.hpp"
#include "transforms.hpp"

struct loca_matrix {
  loca::Matrix m;
};

struct loca_config {
  loca::KvConfig kv;
};

namespace {

thread_local std::string g_last_error;

loca_status status_of(const loca::Error& e) {
  switch (e.code()) {
    case loca::Errc::invalid_argument: return LOCA_ERR_INVALID_ARGUMENT;
    case loca::Errc::dimension_mismatch: return LOCA_ERR_DIMENSION_MISMATCH;
    case loca::Errc::out_of_bounds: return LOCA_ERR_OUT_OF_BOUNDS;
    case loca::Errc::numeric: return LOCA_ERR_NUMERIC;
    case loca::Errc::io: return LOCA_ERR_IO;
    case loca::Errc::diverged: return LOCA_ERR_DIVERGED;
  }
  return LOCA_ERR_NUMERIC;
}

template <typename Fn>
loca_status guarded(Fn&& fn) {
  try {
    fn();
    return LOCA_OK;
  } catch (const loca::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LOCA_ERR_INVALID_ARGUMENT;
  }
}

loca_status require_c(bool cond, loca_status code, const char* msg) {
  if (cond) return LOCA_OK;
  g_last_error = msg;
  return code;
}

loca_matrix* wrap(loca::Matrix m) { return new loca_matrix{std::move(m)}; }

std::vector<loca::GridCell> cells_from(const int64_t* locations, int64_t count) {
  std::vector<loca::GridCell> cells(static_cast<std::size_t>(count));
  for (int64_t i = 0; i < count; ++i)
    cells[static_cast<std::size_t>(i)] = {locations[2 * i], locations[2 * i + 1]};
  return cells;
}

}  // namespace

extern "C" {

const char* loca_version(void) { return loca::version_string(); }

const char* loca_last_error(void) { return g_last_error.c_str(); }

loca_matrix* loca_matrix_create(int64_t rows, int64_t cols) {
  if (rows < 1 || cols < 1) {
    g_last_error = "loca_matrix_create: dims must be >= 1";
    return nullptr;
  }
  return wrap(loca::Matrix::Zero(rows, cols));
}

loca_matrix* loca_matrix_from_data(int64_t rows, int64_t cols, const double* row_major) {
  if (rows < 1 || cols < 1 || row_major == nullptr) {
    g_last_error = "loca_matrix_from_data: bad arguments";
    return nullptr;
  }
  loca::Matrix m(rows, cols);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) m(i, j) = row_major[i * cols + j];
  return wrap(std::move(m));
}

void loca_matrix_destroy(loca_matrix* m) { delete m; }

int64_t loca_matrix_rows(const loca_matrix* m) { return m == nullptr ? 0 : m->m.rows(); }

int64_t loca_matrix_cols(const loca_matrix* m) { return m == nullptr ? 0 : m->m.cols(); }

loca_status loca_matrix_get(const loca_matrix* m, int64_t row, int64_t col, double* out) {
  if (auto st = require_c(m != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_matrix_get: null argument"))
    return st;
  if (auto st = require_c(row >= 0 && row < m->m.rows() && col >= 0 && col < m->m.cols(),
                          LOCA_ERR_OUT_OF_BOUNDS, "loca_matrix_get: index out of bounds"))
    return st;
  *out = m->m(row, col);
  return LOCA_OK;
}

loca_status loca_matrix_set(loca_matrix* m, int64_t row, int64_t col, double value) {
  if (auto st = require_c(m != nullptr, LOCA_ERR_INVALID_ARGUMENT, "loca_matrix_set: null matrix"))
    return st;
  if (auto st = require_c(row >= 0 && row < m->m.rows() && col >= 0 && col < m->m.cols(),
                          LOCA_ERR_OUT_OF_BOUNDS, "loca_matrix_set: index out of bounds"))
    return st;
  m->m(row, col) = value;
  return LOCA_OK;
}

loca_status loca_matrix_copy_out(const loca_matrix* m, double* out) {
  if (auto st = require_c(m != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_matrix_copy_out: null argument"))
    return st;
  for (int64_t i = 0; i < m->m.rows(); ++i)
    for (int64_t j = 0; j < m->m.cols(); ++j) out[i * m->m.cols() + j] = m->m(i, j);
  return LOCA_OK;
}

loca_status loca_dct2(const loca_matrix* in, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_dct2: null argument"))
    return st;
  return guarded([&] {
    *out = wrap(loca::dct2(in->m, loca::DctBasis::get(in->m.rows(), in->m.cols())));
  });
}

loca_status loca_idct2(const loca_matrix* in, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_idct2: null argument"))
    return st;
  return guarded([&] {
    *out = wrap(loca::idct2_dense(in->m, loca::DctBasis::get(in->m.rows(), in->m.cols())));
  });
}

loca_status loca_fast_dct2(const loca_matrix* in, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_fast_dct2: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::fast_dct2(in->m)); });
}

loca_status loca_fast_idct2(const loca_matrix* in, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_fast_idct2: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::fast_idct2(in->m)); });
}

loca_status loca_scatter(int64_t rows, int64_t cols, const double* coeffs,
                         const int64_t* locations, int64_t count, loca_matrix** out) {
  if (auto st = require_c(out != nullptr && (count == 0 || (coeffs != nullptr && locations != nullptr)),
                          LOCA_ERR_INVALID_ARGUMENT, "loca_scatter: null argument"))
    return st;
  return guarded([&] {
    auto cells = cells_from(locations, count);
    *out = wrap(loca::scatter({coeffs, static_cast<std::size_t>(count)}, cells, rows, cols));
  });
}

loca_status loca_idct2_sparse(int64_t rows, int64_t cols, const double* coeffs,
                              const int64_t* locations, int64_t count, double alpha,
                              loca_matrix** out) {
  if (auto st = require_c(out != nullptr && (count == 0 || (coeffs != nullptr && locations != nullptr)),
                          LOCA_ERR_INVALID_ARGUMENT, "loca_idct2_sparse: null argument"))
    return st;
  return guarded([&] {
    auto cells = cells_from(locations, count);
    loca::Matrix m = loca::idct2_sparse_cells({coeffs, static_cast<std::size_t>(count)}, cells,
                                              loca::DctBasis::get(rows, cols));
    *out = wrap(alpha * m);
  });
}

loca_status loca_dft2(const loca_matrix* in, loca_matrix** re, loca_matrix** im) {
  if (auto st = require_c(in != nullptr && re != nullptr && im != nullptr,
                          LOCA_ERR_INVALID_ARGUMENT, "loca_dft2: null argument"))
    return st;
  return guarded([&] {
    loca::CMatrix f = loca::dft2(in->m);
    *re = wrap(f.real());
    *im = wrap(f.imag());
  });
}

loca_status loca_lowrank_approx(const loca_matrix* in, int64_t rank, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_lowrank_approx: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::lowrank_approx(in->m, rank)); });
}

loca_status loca_dct_top_approx(const loca_matrix* in, int64_t budget, loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_dct_top_approx: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::dct_top_approx(in->m, budget)); });
}

loca_status loca_fourier_top_amplitude_approx(const loca_matrix* in, int64_t cells,
                                              loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_fourier_top_amplitude_approx: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::fourier_top_amplitude_approx(in->m, cells)); });
}

loca_status loca_fourier_top_coeff_approx(const loca_matrix* in, int64_t slots,
                                          loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_fourier_top_coeff_approx: null argument"))
    return st;
  return guarded([&] { *out = wrap(loca::fourier_top_coeff_approx(in->m, slots)); });
}

loca_status loca_fourier_random_approx(const loca_matrix* in, int64_t cells, uint64_t seed,
                                       loca_matrix** out) {
  if (auto st = require_c(in != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_fourier_random_approx: null argument"))
    return st;
  return guarded([&] {
    loca::Rng rng(seed);
    *out = wrap(loca::fourier_random_approx(in->m, cells, rng));
  });
}

loca_status loca_reconstruction_error(const loca_matrix* a, const loca_matrix* b, double* out) {
  if (auto st = require_c(a != nullptr && b != nullptr && out != nullptr,
                          LOCA_ERR_INVALID_ARGUMENT, "loca_reconstruction_error: null argument"))
    return st;
  return guarded([&] { *out = loca::reconstruction_error(a->m, b->m); });
}

loca_status loca_expected_random_selection(int64_t k, int64_t rank, double* out) {
  if (auto st = require_c(out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_expected_random_selection: null output"))
    return st;
  return guarded([&] { *out = loca::expected_random_selection(k, rank); });
}

loca_status loca_mp_support(double q_ratio, double sigma, double* lower, double* upper) {
  if (auto st = require_c(lower != nullptr && upper != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_mp_support: null output"))
    return st;
  return guarded([&] {
    auto [lo, hi] = loca::mp_support(q_ratio, sigma);
    *lower = lo;
    *upper = hi;
  });
}

loca_status loca_esd(const loca_matrix* in, double* eigenvalues, double* outside_mass) {
  if (auto st = require_c(in != nullptr, LOCA_ERR_INVALID_ARGUMENT, "loca_esd: null matrix"))
    return st;
  return guarded([&] {
    loca::EsdReport report = loca::esd(in->m);
    if (eigenvalues != nullptr)
      std::memcpy(eigenvalues, report.eigenvalues.data(),
                  report.eigenvalues.size() * sizeof(double));
    if (outside_mass != nullptr) *outside_mass = report.outside_mass;
  });
}

loca_status loca_tv_distance(const double* samples, int64_t count, double mu, double sigma,
                             int bins, double* out) {
  if (auto st = require_c(samples != nullptr && out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_tv_distance: null argument"))
    return st;
  return guarded([&] {
    *out = loca::tv_distance({samples, static_cast<std::size_t>(count)}, mu, sigma, bins);
  });
}

loca_status loca_wishart_lmax_ratio(int64_t k, int64_t trials, uint64_t seed, double* mean,
                                    double* se) {
  if (auto st = require_c(mean != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_wishart_lmax_ratio: null output"))
    return st;
  return guarded([&] {
    loca::Rng rng(seed);
    loca::MeanStderr ms = loca::wishart_lmax_ratio(k, trials, rng);
    *mean = ms.mean;
    if (se != nullptr) *se = ms.se;
  });
}

loca_status loca_order_stat_upper_bound(double mu, double sigma, int64_t n, int64_t l,
                                        double* out) {
  if (auto st = require_c(out != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_order_stat_upper_bound: null output"))
    return st;
  return guarded([&] { *out = loca::order_stat_upper_bound(mu, sigma, n, l); });
}

loca_config* loca_config_create(void) { return new loca_config{}; }

void loca_config_destroy(loca_config* cfg) { delete cfg; }

loca_status loca_config_set(loca_config* cfg, const char* key, const char* value) {
  if (auto st = require_c(cfg != nullptr && key != nullptr && value != nullptr,
                          LOCA_ERR_INVALID_ARGUMENT, "loca_config_set: null argument"))
    return st;
  cfg->kv.set(key, value);
  return LOCA_OK;
}

loca_status loca_config_load_file(loca_config* cfg, const char* path) {
  if (auto st = require_c(cfg != nullptr && path != nullptr, LOCA_ERR_INVALID_ARGUMENT,
                          "loca_config_load_file: null argument"))
    return st;
  return guarded([&] {
    loca::KvConfig loaded = loca::KvConfig::from_file(path);
    for (const auto& [key, value] : loaded.entries())
      if (!cfg->kv.has(key)) cfg->kv.set(key, value);
  });
}

loca_status loca_run_experiment(const char* name, const loca_config* cfg, const char* out_dir) {
  if (name == nullptr || cfg == nullptr || out_dir == nullptr) {
    g_last_error = "loca_run_experiment: null argument";
    return LOCA_ERR_INVALID_ARGUMENT;
  }
  loca::RunOutcome outcome = loca::run_experiment(name, cfg->kv, out_dir);
  g_last_error = outcome.message;
  switch (outcome.status) {
    case loca::RunStatus::ok: return LOCA_OK;
    case loca::RunStatus::config_error: return LOCA_ERR_CONFIG;
    case loca::RunStatus::acceptance_failure: return LOCA_ERR_ACCEPTANCE;
  }
  return LOCA_ERR_CONFIG;
}

}  // extern "C"
