#include "amscale/linalg.hpp"

#include "amscale/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace amscale::linalg {

ThinQr householder_qr(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (m < n) {
    throw ScalingError(ErrorCode::insufficient_rows,
                       "QR decomposition needs at least as many rows as columns");
  }

  Matrix work = a;
  Matrix r = Matrix::Zero(n, n);
  std::vector<Vector> reflectors(static_cast<std::size_t>(n));

  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index len = m - k;
    Vector x = work.col(k).tail(len);
    const double norm = x.norm();
    Vector v = Vector::Zero(len);
    if (norm > 0.0) {
      const double alpha = x(0) >= 0.0 ? -norm : norm;
      v = x;
      v(0) -= alpha;
      const double vnorm = v.norm();
      if (vnorm > 0.0) {
        v /= vnorm;
        // H = I - 2 v v' applied to the trailing block.
        auto block = work.bottomRightCorner(len, n - k);
        block -= 2.0 * v * (v.transpose() * block);
      }
      work(k, k) = alpha;
      work.col(k).tail(len - 1).setZero();
    }
    reflectors[static_cast<std::size_t>(k)] = std::move(v);
  }
  r = work.topRows(n).triangularView<Eigen::Upper>();

  // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
  Matrix q = Matrix::Identity(m, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const Vector& v = reflectors[static_cast<std::size_t>(k)];
    if (v.size() == 0 || v.squaredNorm() == 0.0) continue;
    auto block = q.bottomRows(m - k);
    block -= 2.0 * v * (v.transpose() * block);
  }
  return {std::move(q), std::move(r)};
}

Vector solve_least_squares(const ThinQr& qr, const Eigen::Ref<const Vector>& b) {
  Vector rhs = qr.q.transpose() * b;
  return qr.r.triangularView<Eigen::Upper>().solve(rhs);
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps) {
  const Eigen::Index dim = symmetric.rows();
  Matrix a = 0.5 * (symmetric + symmetric.transpose());
  Matrix v = Matrix::Identity(dim, dim);
  const double scale = a.norm();
  const double eps = std::numeric_limits<double>::epsilon();

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < dim; ++p) {
      for (Eigen::Index q = p + 1; q < dim; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= eps * scale || off == 0.0) break;

    for (Eigen::Index p = 0; p < dim - 1; ++p) {
      for (Eigen::Index q = p + 1; q < dim; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        Vector col_p = a.col(p);
        a.col(p) = c * col_p - s * a.col(q);
        a.col(q) = s * col_p + c * a.col(q);
        Eigen::RowVectorXd row_p = a.row(p);
        a.row(p) = c * row_p - s * a.row(q);
        a.row(q) = s * row_p + c * a.row(q);
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        Vector vp = v.col(p);
        v.col(p) = c * vp - s * v.col(q);
        v.col(q) = s * vp + c * v.col(q);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  SymmetricEigen out;
  out.values.resize(dim);
  out.vectors.resize(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  out.sweeps = sweep;
  return out;
}

Matrix helmert_basis(Eigen::Index dim) {
  Matrix h = Matrix::Zero(dim, std::max<Eigen::Index>(dim - 1, 0));
  for (Eigen::Index k = 0; k + 1 < dim; ++k) {
    const double denom = std::sqrt(static_cast<double>((k + 1) * (k + 2)));
    h.col(k).head(k + 1).setConstant(1.0 / denom);
    h(k + 1, k) = -static_cast<double>(k + 1) / denom;
  }
  return h;
}

}  // namespace amscale::linalg
