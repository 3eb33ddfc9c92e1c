#pragma once

#include "sumdist/config.hpp"
#include "sumdist/embed.hpp"
#include "sumdist/linalg.hpp"
#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"

namespace sumdist {

struct BicriteriaResult {
    Basis basis;
    double cost_estimate = 0.0;
    int trials_run = 0;
};

/// A (I - BB^T) M without materializing the projector:
/// A*M - (A*B)(B^T*M). Cost O(nnz(A) * cols(M) + d * c * cols(M)).
Matrix residual_apply(const PointMatrix& a, const Basis& b, const Eigen::Ref<const Matrix>& m);

/// Rows of A projected away from B and from xhat:
/// A (I - BB^T)(I - X X^T) M, assuming xhat is orthogonal to B.
Matrix residual_apply2(const PointMatrix& a, const Basis& b, const Basis& xhat,
                       const Eigen::Ref<const Matrix>& m);

/// Sketched estimate of ||A (I-BB^T)(I-XX^T)||_{1,2}: sum of row norms of the
/// residual hit with a Gaussian of ceil(c_gauss_cols * log2(n+2)) columns
/// scaled 1/sqrt(t). With cfg.exact_cost_selection the norm is exact.
double residual_cost_estimate(const PointMatrix& a, const Basis& b, const Basis& xhat,
                              const RngConfig& rng, const Config& cfg);

/// Exact ||A (I-BB^T)(I-XX^T)||_{1,2}; the verification-mode cost.
double residual_cost_exact(const PointMatrix& a, const Basis& b, const Basis& xhat);

/// Constant-factor bicriteria solver: per trial, sketch the residual with a
/// Gaussian, build an l1 embedding of the sketched matrix by Lewis sampling,
/// and take the row space of the sampled rows of A(I-BB^T). Runs
/// ceil(log2(1/delta)) + 1 trials and keeps the one of least estimated cost.
BicriteriaResult poly_approx(const PointMatrix& a, const Basis& b, Index k, double delta,
                             const RngConfig& rng, const Config& cfg = {});

/// Residual sampling refinement: samples rows proportional to their distance
/// from span[B | xhat] (estimated through a Gaussian sketch) and returns an
/// orthonormal basis U of (I-BB^T)[xhat | sampled rows]; U^T B = 0.
BicriteriaResult eps_approx(const PointMatrix& a, const Basis& b, const Basis& xhat, Index k,
                            double trust_factor, double eps, double delta, const RngConfig& rng,
                            const Config& cfg = {});

/// Sample count used by eps_approx: min(n, ceil(c * K * k^3/eps^2 * log2(1/delta+2))).
Index eps_sample_count(Index n, Index k, double trust_factor, double eps, double delta,
                       const Config& cfg);

} // namespace sumdist
