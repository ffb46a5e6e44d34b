#pragma once

// Rotating-frame Hamiltonian, collapse operators and Liouvillian
// superoperator of the driven emitter + two-mode system.

#include <vector>

#include "lambdaqed/hilbert.hpp"
#include "lambdaqed/types.hpp"

namespace lqed {

/// All physical frequencies, couplings and rates of the hybrid system.
/// Angular frequencies in rad/s, rates in 1/s.  Quoted paper values are
/// used as printed (couplings and rates enter the equations as angular
/// rates without an extra 2*pi).
struct SystemParams {
  double omega_e = 0.0;    // excited-level frequency omega_|e>
  double omega_1 = 0.0;    // spin-state frequency omega_|1>
  double omega_2 = 0.0;    // spin-state frequency omega_|2>
  double omega_laser = 0.0;  // drive laser frequency omega_L
  double omega_mode1 = 0.0;  // nanoantenna mode-1 center frequency
  double omega_mode2 = 0.0;  // nanoantenna mode-2 center frequency

  cplx kappa1{0.0, 0.0};   // emitter-mode coupling kappa_1
  cplx kappa2{0.0, 0.0};   // emitter-mode coupling kappa_2
  cplx drive{0.0, 0.0};    // coherent drive Omega on mode 1

  double gamma_rad1 = 0.0;     // radiative loss of mode 1
  double gamma_nonrad1 = 0.0;  // absorptive loss of mode 1
  double gamma_rad2 = 0.0;
  double gamma_nonrad2 = 0.0;

  double gamma_sp_e1 = 0.0;  // free-space spontaneous emission e -> 1
  double gamma_sp_e2 = 0.0;  // free-space spontaneous emission e -> 2
  double gamma_12 = 0.0;     // nonradiative spin transfer 2 -> 1
  double pump = 0.0;         // incoherent pump 2 -> 1 (kept distinct)

  double gamma_deph_1e = 0.0;  // pure dephasing rates
  double gamma_deph_2e = 0.0;
  double gamma_deph_12 = 0.0;

  double Gamma1() const { return gamma_rad1 + gamma_nonrad1; }
  double Gamma2() const { return gamma_rad2 + gamma_nonrad2; }
  double eta1() const { return gamma_rad1 / Gamma1(); }
  double eta2() const { return gamma_rad2 / Gamma2(); }

  /// Throws InvalidArgument on negative rates or Gamma_j == 0.
  void validate() const;
};

/// One Lindblad dissipator: rate gamma_p and collapse operator C_p.
struct CollapseTerm {
  double rate = 0.0;
  Matrix op;
};

/// Generator of the master equation acting on column-stacked vec(rho).
/// vec stacks columns: vec(A X B) = (B^T (x) A) vec(X).
struct Liouvillian {
  SparseMatrix matrix;  // dim^2 x dim^2
  int dim = 0;          // Hilbert-space dimension D

  Vector apply(const Vector& vec_rho) const;
  Matrix apply(const Matrix& rho) const;

  /// Max absolute row sum, used as the magnitude scale of the generator.
  double scale() const;
};

/// Hermitian rotating-frame Hamiltonian (hbar = 1): detuned emitter and
/// mode terms, Jaynes-Cummings couplings and the coherent drive on mode 1.
Matrix build_hamiltonian(const SystemParams& params, const SpaceConfig& config);

/// Collapse terms embedded to the full space: mode losses, spontaneous
/// emission, spin transfer, pump and the three pure-dephasing channels.
/// Terms with zero rate are omitted.
std::vector<CollapseTerm> collapse_terms(const SystemParams& params,
                                         const SpaceConfig& config);

/// Sparse superoperator L with L vec(rho) = vec(-i[H,rho] + sum_p
/// gamma_p (C rho C' - 1/2 {C'C, rho})).
Liouvillian build_liouvillian(const Matrix& hamiltonian,
                              const std::vector<CollapseTerm>& terms);

/// Liouvillian of the Hamiltonian part alone, -i[H, .].
Liouvillian hamiltonian_liouvillian(const Matrix& hamiltonian);

/// Liouvillian of a single unit-rate dissipator D[C].
Liouvillian dissipator_liouvillian(const Matrix& collapse_op);

/// Column-stacking helpers.
Vector vec(const Matrix& rho);
Matrix unvec(const Vector& v, int dim);

}  // namespace lqed
