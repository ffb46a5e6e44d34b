#pragma once

// Propagation of density matrices under a (possibly time-dependent)
// Liouvillian, and steady states by constrained sparse linear solve.
//
// The default integrator is an L-stable adaptive SDIRK method; generator
// eigenvalue magnitudes spanning 1e7:1 and beyond are within contract.
// An adaptive Krylov exponential propagator is available for large,
// non-stiff, time-independent generators.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lambdaqed/model.hpp"
#include "lambdaqed/types.hpp"

namespace lqed {

/// Strictly increasing sample times, t_0 = initial time.
struct TimeGrid {
  std::vector<double> times;

  static TimeGrid linspace(double t0, double t1, int samples);
  void validate() const;
  size_t size() const { return times.size(); }
};

struct IntegratorDiagnostics {
  long steps = 0;
  long rejected = 0;
  long factorizations = 0;
  double max_trace_deviation = 0.0;  // |Tr rho - 1| before renormalization
  double max_hermiticity_deviation = 0.0;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Matrix> states;  // one density matrix per sample
  IntegratorDiagnostics diagnostics;
};

/// Static Liouvillian plus envelope-scaled addends,
/// L(t) = base + sum_k envelope_k(t) * delta_k.
struct GeneratorTerm {
  std::function<double(double)> envelope;
  Liouvillian delta;
};

struct TimeDependentGenerator {
  Liouvillian base;
  std::vector<GeneratorTerm> terms;
  /// Times the integrator must not step across (e.g. pulse-window edges).
  std::vector<double> breakpoints;
  /// Optional cap on the step size at time t; used to resolve narrow
  /// envelope features that error control alone could step over.
  std::function<double(double)> max_step_hint;

  bool is_static() const { return terms.empty(); }
  int dim() const { return base.dim; }
  SparseMatrix at(double t) const;
};

enum class IntegratorMethod { sdirk, krylov };

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  IntegratorMethod method = IntegratorMethod::sdirk;
  long max_steps = 50'000'000;
  /// Fail the run when the pre-renormalization trace or Hermiticity
  /// deviation at a sample point exceeds this; <= 0 disables the check.
  double drift_tolerance = 1e-7;
};

/// Called at each sample with the renormalized state.
using SampleObserver =
    std::function<void(size_t index, double t, const Matrix& rho)>;

/// Propagate rho0 over the grid.  States are trace-renormalized (and
/// symmetrized) at sample points only; drift beyond tolerance fails the
/// run rather than being silently absorbed.
Trajectory evolve(const TimeDependentGenerator& gen, const Matrix& rho0,
                  const TimeGrid& grid, const EvolveOptions& options = {});

/// Same, but streams samples to an observer instead of storing them.
IntegratorDiagnostics evolve_observed(const TimeDependentGenerator& gen,
                                      const Matrix& rho0, const TimeGrid& grid,
                                      const SampleObserver& observer,
                                      const EvolveOptions& options = {});

struct SteadyStateOptions {
  /// Relative residual bound ||L vec(rho)||_inf <= tol * scale(L).
  double residual_tol = 1e-8;
  /// Verify the kernel is one-dimensional via shift-invert Arnoldi and
  /// report multiple steady states as an error.
  bool check_uniqueness = true;
  /// Eigenvalues with |lambda| below this fraction of scale(L) count as
  /// kernel members in the uniqueness check.
  double kernel_tol = 1e-10;
};

/// Stationary state of a time-independent generator: L vec(rho) = 0 with
/// Tr rho = 1, solved as a constrained sparse linear system (trace-row
/// replacement), not by long-time integration.
Matrix steady_state(const Liouvillian& gen, const SteadyStateOptions& options = {});

/// Number of eigenvalues of L with |lambda| <= kernel_tol * scale(L),
/// estimated by shift-invert Arnoldi with a deterministic start vector.
int kernel_dimension(const Liouvillian& gen, double kernel_tol = 1e-10,
                     int max_candidates = 4);

/// w = exp(t*A) v via adaptive Arnoldi
/// (time-independent generators only; used by the krylov evolve path).
Vector krylov_expv(const SparseMatrix& a, const Vector& v, double t,
                   double tol, int max_krylov_dim = 30);

}  // namespace lqed
