#pragma once

#include "sumdist/bicriteria.hpp"
#include "sumdist/config.hpp"
#include "sumdist/linalg.hpp"
#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"

#include <variant>
#include <vector>

namespace sumdist {

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

struct CentersShape {
    Matrix points; // k x d
};

struct SubspaceShape {
    Basis basis;
};

struct UnionOfSubspacesShape {
    std::vector<Basis> parts; // j bases of dimension <= l each
};

using Shape = std::variant<CentersShape, SubspaceShape, UnionOfSubspacesShape>;

Index shape_ambient_dim(const Shape& s);

/// Distance from one point to the shape (min over centers / subspaces).
double shape_distance(const Eigen::Ref<const Vector>& point, const Shape& s);

/// Distances from each row of a dense block to the shape.
Vector shape_distances_rows(const Eigen::Ref<const Matrix>& pts, const Shape& s);

/// sum_i dist(a_i, S); the verification oracle.
double exact_cost(const PointMatrix& a, const Shape& s);

// ---------------------------------------------------------------------------
// Reduced representation
// ---------------------------------------------------------------------------

/// Per-point coordinates in a basis plus a residual distance: sufficient
/// statistics for (1 +- eps) shape-cost queries.
struct ReducedRep {
    Basis basis;      // d x c
    Matrix coords;    // n x c, row i holds x_i
    Vector residuals; // n, entry i holds v_i
    double eps = 0.0;
    std::uint64_t seed = 0;

    // extraction diagnostics
    Index fallback_rows = 0;   // rows where every sketch failed the check
    bool sketch_path = false;  // false when exact projection was used throughout

    [[nodiscard]] Index point_count() const { return coords.rows(); }
};

/// sum_i sqrt(dist(B x_i, S)^2 + v_i^2).
double reduced_cost(const ReducedRep& rep, const Shape& s);

/// The adaptive loop: i* rounds of poly_approx + eps_approx, accumulating an
/// orthogonal basis. i* is drawn uniformly from {1, ..., floor(10/eps)+1}
/// unless cfg.deterministic_istar fixes it at the maximum. When `snapshots`
/// is given, the state of B after each completed round is appended.
Basis dimension_reduction(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                          const Config& cfg = {}, std::vector<Basis>* snapshots = nullptr);

/// Per-row approximate projections onto a given basis via CountSketch
/// regression with a cross-sketch consistency check; falls back to the exact
/// projection for rows where no sketch passes (and uses the exact path
/// outright when the sketch would need at least d rows).
ReducedRep extract_reduced_rep(const PointMatrix& a, const Basis& b, double eps,
                               const RngConfig& rng, const Config& cfg = {});

/// dimension_reduction at eps^2/c_eps_inner followed by extract_reduced_rep.
ReducedRep complete_dim_reduce(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                               const Config& cfg = {});

/// sqrt(max(0, ||a_i||^2 - ||B^T a_i||^2)) for every row: exact distances to
/// the subspace, without materializing the projector.
Vector residual_row_norms(const PointMatrix& a, const Basis& b);

} // namespace sumdist
