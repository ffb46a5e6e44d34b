#include "lambdaqed/model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace lqed {

namespace {

SparseMatrix to_sparse(const Matrix& m) {
  return m.sparseView(1.0, 0.0);  // keep exact nonzeros
}

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

// vec(A X B) = (B^T (x) A) vec(X) with column stacking.
SparseMatrix left_mult(const SparseMatrix& a, int dim) {
  return Eigen::kroneckerProduct(sparse_identity(dim), a).eval();
}

SparseMatrix right_mult(const SparseMatrix& b, int dim) {
  return Eigen::kroneckerProduct(SparseMatrix(b.transpose()), sparse_identity(dim)).eval();
}

}  // namespace

void SystemParams::validate() const {
  const double rates[] = {gamma_rad1,   gamma_nonrad1, gamma_rad2,
                          gamma_nonrad2, gamma_sp_e1,  gamma_sp_e2,
                          gamma_12,      pump,          gamma_deph_1e,
                          gamma_deph_2e, gamma_deph_12};
  for (double r : rates)
    require(r >= 0.0, "SystemParams: rates must be non-negative");
  require(Gamma1() > 0.0, "SystemParams: Gamma_1 must be positive");
  require(Gamma2() > 0.0, "SystemParams: Gamma_2 must be positive");
}

Matrix build_hamiltonian(const SystemParams& params, const SpaceConfig& config) {
  config.validate();
  const int d = config.dim();
  const double wl = params.omega_laser;

  Matrix h = Matrix::Zero(d, d);
  h += (params.omega_e - wl) * embed(emitter_flip(Level::e, Level::e), Slot::emitter, config);
  h += params.omega_1 * embed(emitter_flip(Level::g1, Level::g1), Slot::emitter, config);
  h += params.omega_2 * embed(emitter_flip(Level::g2, Level::g2), Slot::emitter, config);

  const Matrix a1 = embed(annihilation(config.n_max1), Slot::mode1, config);
  const Matrix a2 = embed(annihilation(config.n_max2), Slot::mode2, config);
  h += (params.omega_mode1 - wl) * (dagger(a1) * a1);
  h += (params.omega_mode2 - wl) * (dagger(a2) * a2);

  const Matrix s1e = embed(emitter_flip(Level::g1, Level::e), Slot::emitter, config);
  const Matrix s2e = embed(emitter_flip(Level::g2, Level::e), Slot::emitter, config);
  h += params.kappa1 * (dagger(a1) * s1e) + std::conj(params.kappa1) * (dagger(s1e) * a1);
  h += params.kappa2 * (dagger(a2) * s2e) + std::conj(params.kappa2) * (dagger(s2e) * a2);

  h += params.drive * dagger(a1) + std::conj(params.drive) * a1;
  return h;
}

std::vector<CollapseTerm> collapse_terms(const SystemParams& params,
                                         const SpaceConfig& config) {
  params.validate();
  config.validate();

  const Matrix a1 = embed(annihilation(config.n_max1), Slot::mode1, config);
  const Matrix a2 = embed(annihilation(config.n_max2), Slot::mode2, config);
  const auto flip = [&](Level k, Level l) {
    return embed(emitter_flip(k, l), Slot::emitter, config);
  };

  std::vector<CollapseTerm> terms;
  const auto add = [&terms](double rate, Matrix op) {
    if (rate > 0.0) terms.push_back({rate, std::move(op)});
  };
  add(params.Gamma1(), a1);
  add(params.Gamma2(), a2);
  add(params.gamma_sp_e1, flip(Level::g1, Level::e));
  add(params.gamma_sp_e2, flip(Level::g2, Level::e));
  add(params.gamma_12, flip(Level::g1, Level::g2));
  add(params.pump, flip(Level::g1, Level::g2));
  add(params.gamma_deph_1e, flip(Level::g1, Level::g1) - flip(Level::e, Level::e));
  add(params.gamma_deph_2e, flip(Level::g2, Level::g2) - flip(Level::e, Level::e));
  add(params.gamma_deph_12, flip(Level::g1, Level::g1) - flip(Level::g2, Level::g2));
  return terms;
}

Liouvillian hamiltonian_liouvillian(const Matrix& hamiltonian) {
  require(hamiltonian.rows() == hamiltonian.cols(),
          "hamiltonian_liouvillian: H must be square");
  const int d = int(hamiltonian.rows());
  const SparseMatrix h = to_sparse(hamiltonian);
  Liouvillian l;
  l.dim = d;
  l.matrix = (-imag_unit * (left_mult(h, d) - right_mult(h, d))).eval();
  return l;
}

Liouvillian dissipator_liouvillian(const Matrix& collapse_op) {
  require(collapse_op.rows() == collapse_op.cols(),
          "dissipator_liouvillian: C must be square");
  const int d = int(collapse_op.rows());
  const SparseMatrix c = to_sparse(collapse_op);
  const SparseMatrix cdc = (SparseMatrix(c.adjoint()) * c).eval();
  Liouvillian l;
  l.dim = d;
  // C rho C' -> (conj(C) (x) C) vec(rho)
  l.matrix = (Eigen::kroneckerProduct(SparseMatrix(c.conjugate()), c).eval()
              - 0.5 * (left_mult(cdc, d) + right_mult(cdc, d))).eval();
  return l;
}

Liouvillian build_liouvillian(const Matrix& hamiltonian,
                              const std::vector<CollapseTerm>& terms) {
  Liouvillian l = hamiltonian_liouvillian(hamiltonian);
  for (const auto& term : terms) {
    require(term.op.rows() == hamiltonian.rows(),
            "build_liouvillian: collapse operator dimension mismatch");
    require(term.rate >= 0.0, "build_liouvillian: negative rate");
    if (term.rate == 0.0) continue;
    l.matrix += (term.rate * dissipator_liouvillian(term.op).matrix).eval();
  }
  l.matrix.makeCompressed();
  return l;
}

Vector Liouvillian::apply(const Vector& vec_rho) const {
  require(vec_rho.size() == Eigen::Index(dim) * dim,
          "Liouvillian::apply: size mismatch");
  return matrix * vec_rho;
}

Matrix Liouvillian::apply(const Matrix& rho) const {
  require(rho.rows() == dim && rho.cols() == dim,
          "Liouvillian::apply: dimension mismatch");
  return unvec(matrix * vec(rho), dim);
}

double Liouvillian::scale() const {
  RealVector row_sums = RealVector::Zero(matrix.rows());
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
      row_sums(it.row()) += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

Vector vec(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvec(const Vector& v, int dim) {
  require(v.size() == Eigen::Index(dim) * dim, "unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

}  // namespace lqed
