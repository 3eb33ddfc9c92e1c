#include "sumdist/point_matrix.hpp"

#include <stdexcept>

namespace sumdist {

PointMatrix::PointMatrix(Matrix dense) : sparse_storage_(false), dense_(std::move(dense)) {}

PointMatrix::PointMatrix(SparseMatrix sparse) : sparse_storage_(true), sparse_(std::move(sparse)) {
    sparse_.makeCompressed();
}

Index PointMatrix::nnz() const {
    if (sparse_storage_) return sparse_.nonZeros();
    return (dense_.array() != 0.0).count();
}

Matrix PointMatrix::multiply(const Eigen::Ref<const Matrix>& m) const {
    if (m.rows() != cols())
        throw std::invalid_argument("PointMatrix::multiply: dimension mismatch");
    if (sparse_storage_) return sparse_ * m;
    return dense_ * m;
}

Vector PointMatrix::row(Index i) const {
    if (i < 0 || i >= rows()) throw std::out_of_range("PointMatrix::row");
    if (!sparse_storage_) return dense_.row(i).transpose();
    Vector out = Vector::Zero(cols());
    for (SparseMatrix::InnerIterator it(sparse_, i); it; ++it) out(it.col()) = it.value();
    return out;
}

Matrix PointMatrix::gather_rows(const std::vector<std::pair<Index, double>>& picks) const {
    Matrix out(static_cast<Index>(picks.size()), cols());
    for (Index j = 0; j < out.rows(); ++j) {
        const auto& [idx, scale] = picks[static_cast<std::size_t>(j)];
        out.row(j) = scale * row(idx).transpose();
    }
    return out;
}

Vector PointMatrix::row_norms() const {
    if (!sparse_storage_) return dense_.rowwise().norm();
    Vector out = Vector::Zero(rows());
    for (Index i = 0; i < sparse_.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(sparse_, i); it; ++it) s += it.value() * it.value();
        out(i) = std::sqrt(s);
    }
    return out;
}

Matrix PointMatrix::block_dense(Index begin, Index end) const {
    if (begin < 0 || end < begin || end > rows())
        throw std::out_of_range("PointMatrix::block_dense");
    if (!sparse_storage_) return dense_.middleRows(begin, end - begin);
    Matrix out = Matrix::Zero(end - begin, cols());
    for (Index i = begin; i < end; ++i)
        for (SparseMatrix::InnerIterator it(sparse_, i); it; ++it)
            out(i - begin, it.col()) = it.value();
    return out;
}

Matrix PointMatrix::to_dense() const {
    if (!sparse_storage_) return dense_;
    return Matrix(sparse_);
}

} // namespace sumdist
