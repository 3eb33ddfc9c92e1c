#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <utility>
#include <vector>

namespace sumdist {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// The n x d input: one point per row, dense or sparse storage.
/// Immutable after construction; all members are const-safe.
class PointMatrix {
  public:
    PointMatrix() = default;
    explicit PointMatrix(Matrix dense);
    explicit PointMatrix(SparseMatrix sparse);

    [[nodiscard]] Index rows() const { return sparse_storage_ ? sparse_.rows() : dense_.rows(); }
    [[nodiscard]] Index cols() const { return sparse_storage_ ? sparse_.cols() : dense_.cols(); }
    [[nodiscard]] Index nnz() const;
    [[nodiscard]] bool is_sparse() const { return sparse_storage_; }

    /// A * M. Cost O(nnz(A) * cols(M)) in the sparse case.
    [[nodiscard]] Matrix multiply(const Eigen::Ref<const Matrix>& m) const;

    /// Row i as a dense vector of length d.
    [[nodiscard]] Vector row(Index i) const;

    /// Stacks scale_j * A[index_j, :] for each (index, scale) pair.
    [[nodiscard]] Matrix gather_rows(const std::vector<std::pair<Index, double>>& picks) const;

    /// Euclidean norm of every row.
    [[nodiscard]] Vector row_norms() const;

    /// Contiguous row block [begin, end) as a dense matrix.
    [[nodiscard]] Matrix block_dense(Index begin, Index end) const;

    /// Materializes dense storage (baselines and small-instance oracles).
    [[nodiscard]] Matrix to_dense() const;

    [[nodiscard]] const Matrix& dense() const { return dense_; }
    [[nodiscard]] const SparseMatrix& sparse() const { return sparse_; }

  private:
    bool sparse_storage_ = false;
    Matrix dense_;
    SparseMatrix sparse_;
};

} // namespace sumdist
