#pragma once

#include "core/fom.hpp"
#include "core/types.hpp"

namespace topt {

// Orthonormal basis extracted from snapshot data, together with the full
// singular spectrum of the snapshot matrix for mode selection and reporting.
struct PodBasis {
  Matrix modes;
  Vector singular_values;
};

PodBasis compute_pod_basis(const Matrix& snapshots, int n_modes);

// Basis spanning state and adjoint snapshots together. Each block is scaled
// to unit Frobenius norm before the spectra are mixed, so neither trajectory
// dominates by sheer magnitude.
PodBasis compute_combined_basis(const Matrix& state_snapshots,
                                const Matrix& adjoint_snapshots, int n_modes);

// Number of leading modes with sigma_i / sigma_1 > eps, never less than one.
int select_mode_count(const Vector& singular_values, double eps);

// Galerkin projection of the dynamics onto an orthonormal basis:
// da/dt = a_red a + b_red u with the reconstruction q ~ basis a.
struct PodRom {
  Matrix basis;
  Matrix a_red;
  Matrix b_red;
};

PodRom build_pod_rom(const FomSystem& sys, const Matrix& basis);

// Reduced coefficients at every time node; column 0 is basis^T q0.
Matrix solve_pod_state(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                       const Matrix& u);

// Tracking-plus-penalty cost of the reconstruction basis * coeffs.
double pod_cost(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg, const Matrix& coeffs,
                const Matrix& u);

// Adjoint of the reduced dynamics (reduce-then-optimize): backward system
// with operator a_red^T driven by the projected tracking residual.
Matrix solve_pod_adjoint(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                         const Matrix& coeffs);

// Control gradient induced by the reduced adjoint: mu u + b_red^T a_pa.
Matrix pod_gradient(const PodRom& rom, const FomSystem& sys, const Matrix& u,
                    const Matrix& adjoint_coeffs);

// Reduction of the full-order adjoint equation onto its own basis
// (optimize-then-reduce). With the state basis this reproduces
// solve_pod_adjoint up to the floating-point evaluation order.
struct PodAdjointRom {
  Matrix basis;
  Matrix at_red;
  Matrix bt_red;
};

PodAdjointRom build_pod_adjoint_rom(const FomSystem& sys, const Matrix& basis);

// Reduced adjoint coefficients from a full-space state trajectory.
Matrix solve_pod_adjoint_on_basis(const PodAdjointRom& arom, const FomSystem& sys,
                                  const TimeGrid& tg, const Matrix& state);

// Control gradient from optimize-then-reduce coefficients: mu u + bt_red^T y.
Matrix pod_adjoint_gradient(const PodAdjointRom& arom, const FomSystem& sys, const Matrix& u,
                            const Matrix& adjoint_coeffs);

} // namespace topt
