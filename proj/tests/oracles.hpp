// Copyright (c) dcalm contributors
//
// Brute-force reference computations shared by the test suites. Nothing here
// calls into the library's solvers.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;

/// Minimizer of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Best point of an evenly spaced 1-D grid with `points` nodes.
inline std::pair<double, double> grid_1d(const std::function<double(double)>& f, double lo,
                                         double hi, int points) {
  double best_x = lo;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return {best_x, best_f};
}

/// Best point of a points×points grid on [lo, hi]².
inline std::pair<Vec, double> grid_2d(const std::function<double(const Vec&)>& f, double lo,
                                      double hi, int points) {
  Vec best(2);
  double best_f = std::numeric_limits<double>::infinity();
  Vec y(2);
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      y << lo + (hi - lo) * i / (points - 1), lo + (hi - lo) * j / (points - 1);
      const double v = f(y);
      if (v < best_f) {
        best_f = v;
        best = y;
      }
    }
  }
  return {best, best_f};
}

/// Grid search followed by coordinate-wise golden-section polishing over a
/// shrinking window; adequate for convex 2-D functions.
inline std::pair<Vec, double> refine_2d(const std::function<double(const Vec&)>& f, double lo,
                                        double hi, int points = 201) {
  auto [x, fx] = grid_2d(f, lo, hi, points);
  double radius = (hi - lo) / (points - 1);
  for (int round = 0; round < 60; ++round) {
    for (int coord = 0; coord < 2; ++coord) {
      const auto line = [&](double t) {
        Vec y = x;
        y[coord] = t;
        return f(y);
      };
      const double t = golden_section(line, x[coord] - radius, x[coord] + radius, 1e-13);
      Vec y = x;
      y[coord] = t;
      if (const double fy = f(y); fy <= fx) {
        x = y;
        fx = fy;
      }
    }
    radius *= 0.7;
  }
  return {x, fx};
}

/// Central finite-difference gradient.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Vec random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace oracle
