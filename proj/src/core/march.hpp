#pragma once

#include "core/types.hpp"

#include <string>

namespace topt {

// RK4 for x' = op x + f(t) with f sampled at the time nodes and linearly
// interpolated at the half steps. Column j of the result is x at node j;
// column 0 is the initial state. The operator only needs operator*(vector),
// so sparse and dense systems share this kernel.
template <class Op>
Matrix rk4_forward(const Op& op, const Matrix& forcing, double dt, const Vector& x0,
                   const char* label) {
  const int m = static_cast<int>(x0.size());
  const int n = static_cast<int>(forcing.cols());
  Matrix out(m, n);
  out.col(0) = x0;
  Vector x = x0;
  Vector k1(m), k2(m), k3(m), k4(m), fh(m);
  for (int j = 0; j + 1 < n; ++j) {
    fh = 0.5 * (forcing.col(j) + forcing.col(j + 1));
    k1.noalias() = op * x;
    k1 += forcing.col(j);
    k2.noalias() = op * (x + (0.5 * dt) * k1);
    k2 += fh;
    k3.noalias() = op * (x + (0.5 * dt) * k2);
    k3 += fh;
    k4.noalias() = op * (x + dt * k3);
    k4 += forcing.col(j + 1);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      throw Error::diverged(std::string(label) + " integration diverged at step " +
                            std::to_string(j + 1));
    out.col(j + 1) = x;
  }
  return out;
}

// Backward march of -x' = op x + s(t) from a zero terminal state, the form
// shared by every adjoint system here. Column j of the result is x at node j.
template <class Op>
Matrix rk4_backward(const Op& op, const Matrix& source, double dt, const char* label) {
  const int m = static_cast<int>(source.rows());
  const int n = static_cast<int>(source.cols());
  Matrix out(m, n);
  out.col(n - 1).setZero();
  Vector x = Vector::Zero(m);
  Vector k1(m), k2(m), k3(m), k4(m), sh(m);
  for (int j = n - 1; j > 0; --j) {
    sh = 0.5 * (source.col(j) + source.col(j - 1));
    k1.noalias() = op * x;
    k1 += source.col(j);
    k2.noalias() = op * (x + (0.5 * dt) * k1);
    k2 += sh;
    k3.noalias() = op * (x + (0.5 * dt) * k2);
    k3 += sh;
    k4.noalias() = op * (x + dt * k3);
    k4 += source.col(j - 1);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      throw Error::diverged(std::string(label) + " integration diverged at step " +
                            std::to_string(j));
    out.col(j - 1) = x;
  }
  return out;
}

} // namespace topt
