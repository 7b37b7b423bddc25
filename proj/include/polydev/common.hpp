#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace polydev {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid arguments or broken preconditions (bad body parameters,
/// malformed configs, out-of-range exponents, ...).  CLI exit code 1.
class contract_violation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that started from valid inputs but could not produce a
/// trustworthy result (rejection envelope violated, degenerate hull after
/// retry, standard error above its cap, ...).  CLI exit code 2.
class numerical_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Surface measure of the unit sphere S^{n-1}: 2 pi^{n/2} / Gamma(n/2).
inline double sphere_surface(int n) {
  if (n < 1) throw contract_violation("sphere_surface: dimension must be >= 1");
  return 2.0 * std::exp(0.5 * n * std::log(kPi) - std::lgamma(0.5 * n));
}

/// Volume of the unit ball in R^n: pi^{n/2} / Gamma(n/2 + 1).
inline double ball_volume(int n) {
  if (n < 1) throw contract_violation("ball_volume: dimension must be >= 1");
  return std::exp(0.5 * n * std::log(kPi) - std::lgamma(0.5 * n + 1.0));
}

/// Shortest-round-trip-stable formatting used by every CSV/JSON writer so
/// that identical runs produce byte-identical files.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Runs fn(i) for i in [0, count) on `workers` threads.  Work is strided by
/// index, results must be written to per-index slots by the caller; the
/// visible outcome is independent of the worker count.
inline void parallel_for_indexed(std::int64_t count, int workers,
                                 const std::function<void(std::int64_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::int64_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace polydev
