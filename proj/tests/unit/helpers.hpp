#pragma once

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <functional>

#include "ohmgrad/error.hpp"
#include "ohmgrad/graph.hpp"
#include "ohmgrad/rng.hpp"

namespace testing {

// 0 -> 1 -> 2 -> 0
inline ohmgrad::CircuitGraph triangle() { return ohmgrad::CircuitGraph(3, {{0, 1}, {1, 2}, {2, 0}}); }

inline ohmgrad::CircuitGraph path3() { return ohmgrad::CircuitGraph(3, {{0, 1}, {1, 2}}); }

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

inline Eigen::VectorXd normals(ohmgrad::Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.normal();
  return v;
}

inline Eigen::VectorXd log_uniform(ohmgrad::Rng& rng, Eigen::Index n, double lo = 0.1, double hi = 10.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return v;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Runs f and returns the error code it throws; fails the test when nothing is thrown.
inline ohmgrad::Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ohmgrad::Error& e) {
    return e.code();
  }
  FAIL("expected an ohmgrad::Error");
  return ohmgrad::Errc::invalid_argument;
}

}  // namespace testing
