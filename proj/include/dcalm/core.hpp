// Copyright (c) dcalm contributors

#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>
#include <string>

namespace dcalm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Malformed arguments: dimension mismatches, out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite oracle values or a numerical routine that cannot make progress.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data violating a structural assumption (e.g. coincident anchors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

inline void require_size(const Vector& v, Index expected, const char* what) {
  if (v.size() != expected) {
    throw InputError(std::string(what) + ": expected length " +
                     std::to_string(expected) + ", got " +
                     std::to_string(v.size()));
  }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// ‖max{0, y}‖ with componentwise max.
inline double positive_part_norm(const Vector& y) {
  return y.cwiseMax(0.0).norm();
}

/// Componentwise min{y, z}.
inline Vector cwise_min(const Vector& y, const Vector& z) {
  return y.cwiseMin(z);
}

/// Wall-clock and per-thread CPU time since construction.
class Stopwatch {
 public:
  Stopwatch() : wall_start_(Clock::now()), cpu_start_(thread_cpu_seconds()) {}

  double wall_seconds() const {
    return std::chrono::duration<double>(Clock::now() - wall_start_).count();
  }

  double cpu_seconds() const { return thread_cpu_seconds() - cpu_start_; }

 private:
  using Clock = std::chrono::steady_clock;

  static double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
  }

  Clock::time_point wall_start_;
  double cpu_start_;
};

}  // namespace dcalm
