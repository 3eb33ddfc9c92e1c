#pragma once

#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"

#include <cstdint>
#include <vector>

namespace sumdist {

enum class SketchKind { Gaussian, Cauchy };

/// A fully materialized random sketch. Entries are a pure function of
/// (rng, kind, dimensions); regenerating with the same arguments gives an
/// identical matrix.
struct DenseSketch {
    SketchKind kind = SketchKind::Gaussian;
    double scale = 1.0;
    Matrix entries; // rows x cols

    [[nodiscard]] Index rows() const { return entries.rows(); }
    [[nodiscard]] Index cols() const { return entries.cols(); }
};

/// Hash-and-sign sketch: each input coordinate lands in exactly one bucket
/// with a +-1 sign. Applying it costs O(nnz) of the operand.
struct CountSketch {
    Index rows = 0;
    Index cols = 0;
    std::vector<Index> bucket; // size cols, values in [0, rows)
    std::vector<std::int8_t> sign; // size cols, +1 or -1
};

/// i.i.d. N(0, scale^2) entries.
DenseSketch gaussian_sketch(Index rows, Index cols, double scale, const RngConfig& rng);

/// i.i.d. standard Cauchy entries, generated as the ratio of two
/// independent standard normals.
DenseSketch cauchy_sketch(Index rows, Index cols, const RngConfig& rng);

CountSketch make_countsketch(Index rows, Index cols, const RngConfig& rng);

/// out[r, c] = sum over input rows i with bucket(i)=r of sign(i) * M(i, c).
Matrix countsketch_apply(const CountSketch& sk, const Eigen::Ref<const Matrix>& m);

/// CountSketch applied to A^T without materializing the transpose:
/// returns sk.rows x n where column i is sk applied to point a_i.
/// Requires sk.cols == A.cols().
Matrix countsketch_apply_transpose(const CountSketch& sk, const PointMatrix& a);

/// median(|C x|): Indyk's estimator of ||x||_1.
double median_abs_l1(const DenseSketch& cauchy, const Eigen::Ref<const Vector>& x);

/// ||x^T G||_2 for G with t columns scaled 1/sqrt(t); concentrates at ||x||_2.
double gaussian_l2_estimate(const DenseSketch& gauss, const Eigen::Ref<const Vector>& x);

/// sqrt(pi/2) * (1/t) * ||x^T G||_1 for an unscaled Gaussian G with t columns;
/// concentrates at ||x||_2.
double gaussian_l1_to_l2(const DenseSketch& gauss, const Eigen::Ref<const Vector>& x, Index t);

/// (sum_i ||row_i||_2^p)^(1/p); p = 1 is the sum-of-row-norms aggregate.
double norm_p2(const Eigen::Ref<const Matrix>& m, double p);

/// Median of a vector's entries (average of the two middle order statistics
/// for even length). Used by all median-based estimators.
double median(std::vector<double> values);

} // namespace sumdist
