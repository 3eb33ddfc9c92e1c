#pragma once

#include "sumdist/config.hpp"
#include "sumdist/dimreduce.hpp"
#include "sumdist/linalg.hpp"
#include "sumdist/rng.hpp"

#include <vector>

namespace sumdist {

/// Weighted subset of reduced points. Row j stands for original point
/// rows[j] with weight weights[j]; duplicates from multiset sampling are
/// kept as separate entries.
struct WeightedCoreset {
    std::vector<Index> rows;
    Vector weights;
    Matrix coords;    // |rows| x c
    Vector residuals; // |rows|
    Basis basis;

    [[nodiscard]] Index size() const { return static_cast<Index>(rows.size()); }
};

/// Seeding result: a constant-factor k-median solution with centers
/// restricted to input rows.
struct KMedianSeed {
    std::vector<Index> center_rows;
    Matrix centers; // k x dims
    std::vector<Index> assignment;
    double cost = 0.0;
};

/// Lewis-weight sampled coreset over Apx = [coords | residuals]; preserves
/// lifted costs of rank-k projections.
WeightedCoreset subspace_coreset(const ReducedRep& rep, Index k, double eps, const RngConfig& rng,
                                 const Config& cfg = {});

/// Sensitivity-sampled coreset for k-median queries against the lifted
/// points, seeded by kmedian_seed.
WeightedCoreset kmedian_coreset(const ReducedRep& rep, Index k, double eps, const RngConfig& rng,
                                const Config& cfg = {});

/// Distance-proportional seeding in a JL projection followed by one
/// single-swap local-search sweep; centers restricted to input rows;
/// assignment and cost reported in the original space.
KMedianSeed kmedian_seed(const Eigen::Ref<const Matrix>& points, Index k, const RngConfig& rng,
                         const Config& cfg = {});

/// sum_j w_j * sqrt(dist(B x_j, S)^2 + v_j^2).
double coreset_query_cost(const WeightedCoreset& cs, const Shape& s);

} // namespace sumdist
