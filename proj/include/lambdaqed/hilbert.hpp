#pragma once

// Truncated tensor-product Hilbert space of the hybrid system:
// a three-level emitter coupled to two bosonic modes.
//
// Basis ordering (normative for every index in this library):
//   index = emitter_level * (n_max1+1) * (n_max2+1) + n1 * (n_max2+1) + n2
// with emitter levels ordered (|1>, |2>, |e>) = (0, 1, 2).

#include <cstdint>

#include "lambdaqed/types.hpp"

namespace lqed {

/// Emitter levels of the lambda system.  |1> and |2> are the low-energy
/// spin states, |e> the excited state.
enum class Level : int { g1 = 0, g2 = 1, e = 2 };

constexpr int kEmitterDim = 3;

inline int level_index(Level l) { return static_cast<int>(l); }

/// Which tensor factor an operator acts on.
enum class Slot { emitter, mode1, mode2 };

/// Truncation of the two Fock spaces.  Emitter dimension is fixed at 3.
struct SpaceConfig {
  int n_max1 = 10;
  int n_max2 = 5;

  int mode1_dim() const { return n_max1 + 1; }
  int mode2_dim() const { return n_max2 + 1; }
  int dim() const { return kEmitterDim * mode1_dim() * mode2_dim(); }

  /// Flat index of the basis state |level, n1, n2>.
  int basis_index(Level level, int n1, int n2) const;

  void validate() const;
};

/// Annihilation operator on a Fock space truncated at n_max photons:
/// <n-1|a|n> = sqrt(n).
Matrix annihilation(int n_max);

/// Emitter flip operator sigma_kl = |k><l| on the bare 3-level space.
Matrix emitter_flip(Level k, Level l);

/// Lift a subsystem operator to the full space by Kronecker products with
/// identities on the other two factors, respecting the basis ordering.
Matrix embed(const Matrix& op, Slot slot, const SpaceConfig& config);

/// Tr(rho * op).  Real to within 1e-10 relative when op is Hermitian and
/// rho is a density matrix.
cplx expectation(const Matrix& rho, const Matrix& op);

/// Conjugate transpose.
inline Matrix dagger(const Matrix& a) { return a.adjoint(); }

/// Basis state |level, n1, n2> as a dim-D column vector.
Vector basis_state(Level level, int n1, int n2, const SpaceConfig& config);

}  // namespace lqed
