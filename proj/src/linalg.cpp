#include "sumdist/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <stdexcept>

namespace sumdist {

double Basis::orthonormality_defect() const {
    if (is_empty()) return 0.0;
    Matrix g = cols.transpose() * cols;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

Basis Basis::truncated(Index c) const {
    if (c >= subspace_dim()) return *this;
    return Basis(cols.leftCols(c));
}

Basis orthonormal_columns(const Eigen::Ref<const Matrix>& m, double rel_tol, double abs_floor) {
    if (m.cols() == 0 || m.rows() == 0) return Basis::empty(m.rows());
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    const Matrix& r = qr.matrixR();
    const double top = std::abs(r(0, 0));
    if (top <= abs_floor || top == 0.0) return Basis::empty(m.rows());
    Index rank = 0;
    const Index kmax = std::min(m.rows(), m.cols());
    for (Index i = 0; i < kmax; ++i)
        if (std::abs(r(i, i)) > rel_tol * top) ++rank;
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), rank);
    return Basis(std::move(q));
}

Basis orthonormal_residual(const Basis& b, const Eigen::Ref<const Matrix>& m, double rel_tol) {
    if (m.cols() == 0) return Basis::empty(m.rows());
    // directions whose residual is tiny relative to the operand are already
    // inside span(B) and must not resurface as spurious basis vectors
    const double scale = m.cwiseAbs().maxCoeff();
    const double floor_tol = rel_tol * scale;
    Matrix residual = project_out(b, m);
    Basis u = orthonormal_columns(residual, rel_tol, floor_tol);
    if (b.is_empty() || u.is_empty()) return u;
    // one reorthogonalization pass keeps U^T B at roundoff even for
    // ill-conditioned inputs
    Matrix clean = u.cols - b.cols * (b.cols.transpose() * u.cols);
    return orthonormal_columns(clean, rel_tol, rel_tol);
}

Basis concat(const Basis& b, const Basis& u) {
    if (b.is_empty()) return u;
    if (u.is_empty()) return b;
    if (b.ambient_dim() != u.ambient_dim())
        throw std::invalid_argument("concat: ambient dimensions differ");
    Matrix joined(b.ambient_dim(), b.subspace_dim() + u.subspace_dim());
    joined << b.cols, u.cols;
    return Basis(std::move(joined));
}

Matrix project_out(const Basis& b, const Eigen::Ref<const Matrix>& m) {
    if (b.is_empty()) return m;
    if (b.ambient_dim() != m.rows())
        throw std::invalid_argument("project_out: dimension mismatch");
    return m - b.cols * (b.cols.transpose() * m);
}

Matrix pseudo_inverse(const Eigen::Ref<const Matrix>& m, double rel_cutoff) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return Matrix::Zero(m.cols(), m.rows());
    const double cutoff = rel_cutoff * sv(0);
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

} // namespace sumdist
