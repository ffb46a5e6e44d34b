#include "lambdaqed/hilbert.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace lqed {

void SpaceConfig::validate() const {
  require(n_max1 >= 0, "SpaceConfig: n_max1 must be >= 0");
  require(n_max2 >= 0, "SpaceConfig: n_max2 must be >= 0");
}

int SpaceConfig::basis_index(Level level, int n1, int n2) const {
  require(n1 >= 0 && n1 <= n_max1, "basis_index: n1 out of range");
  require(n2 >= 0 && n2 <= n_max2, "basis_index: n2 out of range");
  return level_index(level) * mode1_dim() * mode2_dim() + n1 * mode2_dim() + n2;
}

Matrix annihilation(int n_max) {
  require(n_max >= 0, "annihilation: n_max must be >= 0");
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Matrix emitter_flip(Level k, Level l) {
  Matrix m = Matrix::Zero(kEmitterDim, kEmitterDim);
  m(level_index(k), level_index(l)) = 1.0;
  return m;
}

Matrix embed(const Matrix& op, Slot slot, const SpaceConfig& config) {
  config.validate();
  require(op.rows() == op.cols(), "embed: operator must be square");
  const int local = slot == Slot::emitter  ? kEmitterDim
                    : slot == Slot::mode1 ? config.mode1_dim()
                                          : config.mode2_dim();
  require(op.rows() == local, "embed: operator dim does not match slot dim");

  const Matrix i_em = Matrix::Identity(kEmitterDim, kEmitterDim);
  const Matrix i_m1 = Matrix::Identity(config.mode1_dim(), config.mode1_dim());
  const Matrix i_m2 = Matrix::Identity(config.mode2_dim(), config.mode2_dim());
  switch (slot) {
    case Slot::emitter:
      return Eigen::kroneckerProduct(op, Eigen::kroneckerProduct(i_m1, i_m2).eval()).eval();
    case Slot::mode1:
      return Eigen::kroneckerProduct(i_em, Eigen::kroneckerProduct(op, i_m2).eval()).eval();
    default:
      return Eigen::kroneckerProduct(i_em, Eigen::kroneckerProduct(i_m1, op).eval()).eval();
  }
}

cplx expectation(const Matrix& rho, const Matrix& op) {
  require(rho.rows() == rho.cols() && op.rows() == op.cols(),
          "expectation: matrices must be square");
  require(rho.rows() == op.rows(), "expectation: dimension mismatch");
  return (rho * op).trace();
}

Vector basis_state(Level level, int n1, int n2, const SpaceConfig& config) {
  Vector v = Vector::Zero(config.dim());
  v(config.basis_index(level, n1, n2)) = 1.0;
  return v;
}

}  // namespace lqed
