#include "lambdaqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

namespace lqed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hairer-Wanner SDIRK4: L-stable, 5 stages, order 4, stiffly accurate,
// embedded order-3 error estimate.
constexpr double kGamma = 0.25;
constexpr double kC[5] = {0.25, 0.75, 11.0 / 20.0, 0.5, 1.0};
constexpr double kA[5][5] = {
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25}};
// b - bhat, with bhat = (59/48, -17/96, 225/32, -85/12, 0)
constexpr double kErrW[5] = {-3.0 / 16.0, -27.0 / 32.0, 25.0 / 32.0, 0.0, 0.25};

constexpr int kDenseLimit = 256;  // superoperator dim at or below: dense LU

// Linear solver for (I - h*gamma*L) x = b, dense or sparse by size.
class StageSolver {
 public:
  void factor(const SparseMatrix& l, double h_gamma) {
    const int n = int(l.rows());
    if (n <= kDenseLimit) {
      Matrix m = Matrix(-h_gamma * l);
      m.diagonal().array() += 1.0;
      dense_ = std::make_unique<Eigen::PartialPivLU<Matrix>>(m);
      sparse_.reset();
    } else {
      SparseMatrix id(n, n);
      id.setIdentity();
      SparseMatrix m = (id - h_gamma * l).eval();
      m.makeCompressed();
      sparse_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
      sparse_->compute(m);
      if (sparse_->info() != Eigen::Success)
        throw SolverError("sdirk: sparse factorization failed");
      dense_.reset();
    }
  }

  Vector solve(const Vector& b) const {
    if (dense_) return dense_->solve(b);
    Vector x = sparse_->solve(b);
    if (sparse_->info() != Eigen::Success)
      throw SolverError("sdirk: sparse solve failed");
    return x;
  }

  bool ready() const { return dense_ || sparse_; }

 private:
  std::unique_ptr<Eigen::PartialPivLU<Matrix>> dense_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> sparse_;
};

double generator_scale(const SparseMatrix& m) {
  RealVector row_sums = RealVector::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      row_sums(it.row()) += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

double weighted_error_norm(const Vector& err, const Vector& y0, const Vector& y1,
                           double rtol, double atol) {
  double n = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    n = std::max(n, std::abs(err(i)) / sc);
  }
  return n;
}

// One adaptive SDIRK integration from t0 to t1 (y updated in place).
void sdirk_span(const TimeDependentGenerator& gen, Vector& y, double t0,
                double t1, const EvolveOptions& opt, IntegratorDiagnostics& diag,
                double& h_running, StageSolver& solver, double& factored_h,
                bool& factored_valid) {
  if (t1 <= t0) return;
  const bool is_static = gen.is_static();
  const double span = t1 - t0;

  // breakpoints within this span, ascending
  std::vector<double> bps;
  for (double b : gen.breakpoints)
    if (b > t0 + 1e-14 * span && b < t1 - 1e-14 * span) bps.push_back(b);
  std::sort(bps.begin(), bps.end());
  size_t next_bp = 0;

  double t = t0;
  if (h_running <= 0.0) {
    const double scale = generator_scale(gen.at(t0));
    h_running = std::min(span, scale > 0 ? 10.0 / scale : span);
  }

  Vector k[5];
  while (t < t1 - 1e-14 * span) {
    if (diag.steps + diag.rejected > opt.max_steps)
      throw SolverError("evolve: step budget exhausted");

    double h = std::min(h_running, t1 - t);
    while (next_bp < bps.size() && bps[next_bp] <= t + 1e-14 * span) ++next_bp;
    if (next_bp < bps.size()) h = std::min(h, bps[next_bp] - t);
    if (gen.max_step_hint) h = std::min(h, gen.max_step_hint(t));
    if (!(h > 0.0)) throw SolverError("evolve: step size underflow");

    // stages: (I - h*gamma*L_i) k_i = L_i (y + h sum_{j<i} a_ij k_j)
    bool ok = true;
    SparseMatrix lt;
    if (is_static) {
      if (!factored_valid || factored_h != h) {
        solver.factor(gen.base.matrix, h * kGamma);
        factored_h = h;
        factored_valid = true;
        ++diag.factorizations;
      }
    }
    for (int i = 0; i < 5; ++i) {
      Vector rhs = y;
      for (int j = 0; j < i; ++j) rhs += (h * kA[i][j]) * k[j];
      if (is_static) {
        rhs = gen.base.matrix * rhs;
      } else {
        lt = gen.at(t + kC[i] * h);
        solver.factor(lt, h * kGamma);
        ++diag.factorizations;
        rhs = lt * rhs;
      }
      k[i] = solver.solve(rhs);
      if (!k[i].allFinite()) {
        ok = false;
        break;
      }
    }

    if (ok) {
      Vector ynew = y;
      for (int i = 0; i < 5; ++i) ynew += (h * kA[4][i]) * k[i];
      Vector err = Vector::Zero(y.size());
      for (int i = 0; i < 5; ++i) err += (h * kErrW[i]) * k[i];
      err = solver.solve(err);  // stiff damping of the estimate
      const double en = weighted_error_norm(err, y, ynew, opt.rtol, opt.atol);
      if (en <= 1.0 && ynew.allFinite()) {
        t += h;
        y = std::move(ynew);
        ++diag.steps;
        double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.25);
        fac = std::min(5.0, std::max(1.0, fac));
        if (fac > 1.2) h_running = h * fac;  // hysteresis: avoid refactoring
        else h_running = h;
        continue;
      }
      ++diag.rejected;
      h_running = h * std::min(0.9, std::max(0.1, 0.9 * std::pow(en, -0.25)));
    } else {
      ++diag.rejected;
      h_running = h * 0.25;
    }
    if (h_running < 1e-15 * span)
      throw SolverError("evolve: step size underflow (non-convergence)");
  }
}

// Krylov propagation over one span (time-independent generator).
void krylov_span(const SparseMatrix& l, Vector& y, double span, double tol) {
  y = krylov_expv(l, y, span, tol);
}

}  // namespace

TimeGrid TimeGrid::linspace(double t0, double t1, int samples) {
  require(samples >= 2, "TimeGrid: need at least 2 samples");
  require(t1 > t0, "TimeGrid: t1 must exceed t0");
  TimeGrid g;
  g.times.resize(samples);
  for (int i = 0; i < samples; ++i)
    g.times[i] = t0 + (t1 - t0) * double(i) / double(samples - 1);
  return g;
}

void TimeGrid::validate() const {
  require(!times.empty(), "TimeGrid: empty");
  for (size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]), "TimeGrid: non-finite time");
    if (i) require(times[i] > times[i - 1], "TimeGrid: not strictly increasing");
  }
}

SparseMatrix TimeDependentGenerator::at(double t) const {
  SparseMatrix m = base.matrix;
  for (const auto& term : terms) {
    const double f = term.envelope(t);
    if (!std::isfinite(f))
      throw SolverError("generator envelope is non-finite at t=" + std::to_string(t));
    if (f != 0.0) m += (f * term.delta.matrix).eval();
  }
  return m;
}

IntegratorDiagnostics evolve_observed(const TimeDependentGenerator& gen,
                                      const Matrix& rho0, const TimeGrid& grid,
                                      const SampleObserver& observer,
                                      const EvolveOptions& options) {
  grid.validate();
  const int d = gen.dim();
  require(rho0.rows() == d && rho0.cols() == d, "evolve: rho0 dimension mismatch");
  for (const auto& term : gen.terms)
    require(term.delta.dim == d, "evolve: generator addend dimension mismatch");
  require(options.rtol > 0 && options.atol > 0, "evolve: tolerances must be positive");

  IntegratorDiagnostics diag;
  Vector y = vec(rho0);
  double h_running = -1.0;
  StageSolver solver;
  double factored_h = 0.0;
  bool factored_valid = false;

  const bool use_krylov = options.method == IntegratorMethod::krylov;
  if (use_krylov)
    require(gen.is_static(), "evolve: krylov method requires a static generator");

  for (size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) {
      const double t0 = grid.times[i - 1], t1 = grid.times[i];
      if (use_krylov) {
        const double tol = std::max(options.atol, options.rtol * y.norm());
        krylov_span(gen.base.matrix, y, t1 - t0, tol);
        ++diag.steps;
      } else {
        sdirk_span(gen, y, t0, t1, options, diag, h_running, solver, factored_h,
                   factored_valid);
      }
    }
    if (!y.allFinite()) throw SolverError("evolve: non-finite state encountered");

    Matrix rho = unvec(y, d);
    const double tr_dev = std::abs(rho.trace() - cplx(1.0, 0.0));
    const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    diag.max_trace_deviation = std::max(diag.max_trace_deviation, tr_dev);
    diag.max_hermiticity_deviation = std::max(diag.max_hermiticity_deviation, herm_dev);
    if (options.drift_tolerance > 0 &&
        (tr_dev > options.drift_tolerance || herm_dev > options.drift_tolerance))
      throw SolverError("evolve: trace/hermiticity drift " +
                        std::to_string(std::max(tr_dev, herm_dev)) +
                        " exceeds tolerance at t=" + std::to_string(grid.times[i]));
    rho = 0.5 * (rho + rho.adjoint().eval());
    rho /= rho.trace().real();
    if (observer) observer(i, grid.times[i], rho);
    y = vec(rho);
  }
  return diag;
}

Trajectory evolve(const TimeDependentGenerator& gen, const Matrix& rho0,
                  const TimeGrid& grid, const EvolveOptions& options) {
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(grid.size());
  traj.diagnostics = evolve_observed(
      gen, rho0, grid,
      [&traj](size_t, double, const Matrix& rho) { traj.states.push_back(rho); },
      options);
  return traj;
}

Vector krylov_expv(const SparseMatrix& a, const Vector& v, double t, double tol,
                   int max_krylov_dim) {
  require(a.rows() == a.cols(), "krylov_expv: matrix must be square");
  require(a.rows() == v.size(), "krylov_expv: dimension mismatch");
  const Eigen::Index n = a.rows();
  const int m = int(std::min<Eigen::Index>(max_krylov_dim, n));
  if (t == 0.0 || v.norm() == 0.0) return v;

  Vector w = v;
  double t_done = 0.0;
  const double anorm = generator_scale(a);
  double tau = std::min(t, anorm > 0 ? double(m) / anorm : t);
  long guard = 0;

  while (t_done < t * (1.0 - 1e-14)) {
    if (++guard > 200000) throw SolverError("krylov_expv: substep budget exhausted");
    const double beta = w.norm();
    if (beta == 0.0) return w;

    // Arnoldi with modified Gram-Schmidt and one reorthogonalization pass
    Matrix vs(n, m + 1);
    Matrix h = Matrix::Zero(m + 1, m);
    vs.col(0) = w / beta;
    int m_eff = m;
    bool happy = false;
    for (int j = 0; j < m; ++j) {
      Vector p = a * vs.col(j);
      for (int i = 0; i <= j; ++i) {
        const cplx hij = vs.col(i).dot(p);
        h(i, j) = hij;
        p -= hij * vs.col(i);
      }
      for (int i = 0; i <= j; ++i) {  // reorthogonalize
        const cplx corr = vs.col(i).dot(p);
        h(i, j) += corr;
        p -= corr * vs.col(i);
      }
      const double hn = p.norm();
      h(j + 1, j) = hn;
      if (hn < 1e-14 * std::max(1.0, anorm)) {
        m_eff = j + 1;
        happy = true;
        break;
      }
      vs.col(j + 1) = p / hn;
    }

    const Matrix hm = h.topLeftCorner(m_eff, m_eff);
    const double h_next = happy ? 0.0 : std::abs(h(m_eff, m_eff - 1));

    double step = happy ? (t - t_done) : std::min(tau, t - t_done);
    for (;;) {
      const Matrix f = (step * hm).exp();
      const double err_loc = happy ? 0.0 : beta * h_next * std::abs(f(m_eff - 1, 0));
      const double budget = tol * (step / t);
      if (err_loc <= budget || happy) {
        w = beta * (vs.leftCols(m_eff) * f.col(0));
        t_done += step;
        if (!happy && err_loc > 0.0) {
          const double grow =
              std::pow(std::max(budget / err_loc, 1e-2), 1.0 / double(m_eff));
          tau = step * std::min(2.0, std::max(0.5, 0.9 * grow));
        } else {
          tau = std::min(2.0 * step, t - t_done);
        }
        break;
      }
      step *= 0.5;
      if (step < 1e-15 * t) throw SolverError("krylov_expv: step underflow");
    }
  }
  return w;
}

Matrix steady_state(const Liouvillian& gen, const SteadyStateOptions& options) {
  const int d = gen.dim;
  require(d > 0, "steady_state: empty generator");
  const Eigen::Index n = Eigen::Index(d) * d;
  require(gen.matrix.rows() == n, "steady_state: malformed Liouvillian");
  const double scale = gen.scale();
  if (scale == 0.0) throw SolverError("steady_state: zero generator");

  const auto solve_with_row = [&](Eigen::Index replaced_row) {
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(gen.matrix.nonZeros() + d);
    for (int k = 0; k < gen.matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(gen.matrix, k); it; ++it)
        if (it.row() != replaced_row)
          trips.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int i = 0; i < d; ++i)
      trips.emplace_back(int(replaced_row), i * d + i, cplx(scale, 0.0));
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();

    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success)
      throw SolverError("steady_state: factorization failed (degenerate kernel?)");
    Vector b = Vector::Zero(n);
    b(replaced_row) = scale;
    Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw SolverError("steady_state: solve failed");
    Matrix rho = unvec(x, d);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12)
      throw SolverError("steady_state: traceless solution (degenerate kernel?)");
    rho /= tr;
    return rho;
  };

  Matrix rho = solve_with_row(0);
  const double residual = gen.apply(rho).cwiseAbs().maxCoeff();
  if (residual > options.residual_tol * scale)
    throw SolverError("steady_state: residual " + std::to_string(residual) +
                      " exceeds tolerance");

  if (options.check_uniqueness && d >= 2) {
    // a second solve with a different trace-row position must agree;
    // a kernel of dimension > 1 makes the two picks differ
    const Matrix rho2 = solve_with_row(Eigen::Index(d) + 1);
    const double diff = (rho - rho2).cwiseAbs().maxCoeff();
    if (diff > std::max(1e-6, 100 * options.residual_tol))
      throw SolverError("steady_state: multiple steady states detected "
                        "(kernel dimension > 1)");
  }
  return rho;
}

int kernel_dimension(const Liouvillian& gen, double kernel_tol, int) {
  const Eigen::Index n = gen.matrix.rows();
  require(n <= 4096, "kernel_dimension: dense check limited to dim <= 64");
  const Matrix dense = Matrix(gen.matrix);
  Eigen::JacobiSVD<Matrix> svd(dense);
  const auto& sv = svd.singularValues();
  const double cutoff = kernel_tol * gen.scale();
  int count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= cutoff) ++count;
  return count;
}

}  // namespace lqed
