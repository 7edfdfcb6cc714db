#pragma once

#include "amscale/placements.hpp"

namespace amscale::linalg {

// Thin Householder QR of a tall matrix (rows >= cols): a = q * r with
// q'q = I and r upper triangular.
struct ThinQr {
  Matrix q;
  Matrix r;
};

ThinQr householder_qr(const Matrix& a);

// Least-squares coefficients for min ||a x - b|| given a full-column-rank QR.
Vector solve_least_squares(const ThinQr& qr, const Eigen::Ref<const Vector>& b);

// Eigenpairs of a symmetric matrix, eigenvalues sorted descending and
// eigenvectors stored as matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Intended for the small dense operators used here
// (dimension up to a few hundred).
SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = 100);

// Orthonormal basis of the subspace orthogonal to the all-ones vector in R^dim.
// Column k is (1, ..., 1, -(k+1), 0, ..., 0) / sqrt((k+1)(k+2)).
Matrix helmert_basis(Eigen::Index dim);

}  // namespace amscale::linalg
