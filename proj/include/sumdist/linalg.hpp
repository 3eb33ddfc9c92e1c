#pragma once

#include "sumdist/point_matrix.hpp"

namespace sumdist {

/// d x c matrix with orthonormal columns spanning a candidate subspace.
/// c = 0 (the empty basis) is valid and means the zero subspace.
struct Basis {
    Matrix cols; // d x c

    Basis() = default;
    explicit Basis(Matrix m) : cols(std::move(m)) {}

    static Basis empty(Index ambient) { return Basis(Matrix(ambient, 0)); }

    [[nodiscard]] Index ambient_dim() const { return cols.rows(); }
    [[nodiscard]] Index subspace_dim() const { return cols.cols(); }
    [[nodiscard]] bool is_empty() const { return cols.cols() == 0; }

    /// max |B^T B - I|; zero for the empty basis.
    [[nodiscard]] double orthonormality_defect() const;

    /// First c columns (for probing intermediate dimensions).
    [[nodiscard]] Basis truncated(Index c) const;
};

/// Orthonormal basis of the column space of m. Columns are selected by a
/// rank-revealing QR; pivots below rel_tol * largest are dropped. abs_floor
/// guards against numerically-zero inputs: when the largest pivot is at or
/// below it, the matrix counts as zero and the basis is empty.
Basis orthonormal_columns(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10,
                          double abs_floor = 0.0);

/// Orthonormal basis of colspace(m) projected away from an existing basis,
/// i.e. of (I - BB^T) m. Preserves the left-to-right priority of m's columns
/// block-wise when `ordered` blocks are given.
Basis orthonormal_residual(const Basis& b, const Eigen::Ref<const Matrix>& m,
                           double rel_tol = 1e-10);

/// [B | U]; assumes the two bases are mutually orthogonal.
Basis concat(const Basis& b, const Basis& u);

/// (I - BB^T) m for a d x k operand, computed as m - B (B^T m).
Matrix project_out(const Basis& b, const Eigen::Ref<const Matrix>& m);

/// Moore-Penrose pseudoinverse via SVD with relative cutoff.
Matrix pseudo_inverse(const Eigen::Ref<const Matrix>& m, double rel_cutoff = 1e-10);

} // namespace sumdist
