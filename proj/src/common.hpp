#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace loca {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

enum class Errc {
  invalid_argument = 1,
  dimension_mismatch = 2,
  out_of_bounds = 3,
  numeric = 4,
  io = 5,
  diverged = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(Errc::dimension_mismatch, std::string(where) + ": shape mismatch");
}

inline void ensure_finite(const Matrix& m, const char* where) {
  if (!m.allFinite()) fail(Errc::numeric, std::string(where) + ": non-finite entries");
}

inline double squared_norm(const Matrix& m) { return m.squaredNorm(); }

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error (sample stdev / sqrt(n)); se is 0 for n < 2.
inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs) {
    double d = x - out.mean;
    ss += d * d;
  }
  double var = ss / static_cast<double>(n - 1);
  out.se = std::sqrt(var / static_cast<double>(n));
  return out;
}

}  // namespace loca
