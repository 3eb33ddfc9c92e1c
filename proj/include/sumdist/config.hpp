#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace sumdist {

/// Tunable constants of the pipeline. Every O(.) sketch/sample size in the
/// algorithms hides a constant; they are collected here so experiments can
/// override them with --config key=value lists.
struct Config {
    // sketch sizes
    double c_gauss_cols = 8.0;    ///< Gaussian cost-estimation sketch: t = ceil(c * log2(n+2)) columns
    double c_sketch_cols = 2.0;   ///< poly_approx Gaussian S^T: cols = ceil(c * (k + 1/delta0^2))
    double c_lewis_samples = 4.0; ///< Lewis sample count: ceil(c * m * log2(m+2))
    double c_eps_samples = 2.0;   ///< eps_approx residual samples: ceil(c * K * k^3/eps^2 * log2(1/delta+2))
    double c_countsketch_rows = 2.0; ///< CountSketch rows: ceil(c * (c_B+1)^2)
    double c_cauchy_rows = 12.0;  ///< dense-path Cauchy estimators: ceil(c * log2(n*b+2)) rows
    double c_dense_samples = 2.0; ///< poly_approx_dense: ceil(c * k^3.5 * log2(n+2)) picks
    double c_dense_embed = 4.0;   ///< dense-path l1 embedding rows: ceil(c * m * log2(m+2))

    // bicriteria / dimension reduction
    double trial_delta_floor = 1.0 / 3.0; ///< per-trial failure prob used in the cols formula;
                                          ///< best-of-trials amplifies to the requested delta
    double K_default = 100.0;     ///< trust factor passed from poly_approx into eps_approx
    double c_eps_inner = 10.0;    ///< complete_dim_reduce runs dimension_reduction at eps^2/c
    double c_check = 2.0;         ///< sketch consistency window: [1 - eps^2/c, 1 + eps^2/c]
    bool deterministic_istar = false; ///< fix i* = floor(10/eps)+1 instead of drawing it
    bool exact_cost_selection = false; ///< trial selection by exact (1,2)-norm instead of sketch

    // embeddings
    int lewis_iterations = 0;     ///< 0 = auto: ceil(log2(log2(n+4))) + 4
    double embed_alpha_min = 0.5; ///< Lewis-path certification gate
    double embed_beta_max = 1.5;
    double cauchy_alpha_min = 0.05; ///< dense-path certification gate (Cauchy sketches dilate)
    double cauchy_beta_max = 1e3;
    int embed_retries = 3;
    int embed_test_directions = 50;

    // coresets
    double c_subspace_coreset = 2.0; ///< budget ceil(c * k^3/eps^8 * log2(n+2)), capped
    double c_kmedian_coreset = 2.0;  ///< budget ceil(c * (k/eps^2) * sum(s) * log2(n+2)), capped
    double coreset_fraction = 0.2;   ///< cap budgets at ceil(fraction * n) for compression tests
    int seed_candidates = 0;         ///< local-search candidate pool, 0 = auto (5k+10)

    // numerics
    double rank_threshold = 1e-10;   ///< relative pivot threshold for rank-revealing QR
    double sv_cutoff = 1e-10;        ///< relative singular value cutoff for pseudoinverse
    double residual_stop = 1e-12;    ///< stop adapting once ||A(I-BB^T)||_{1,2} <= stop * ||A||_{1,2}

    /// Applies "key=value" overrides (comma or whitespace separated).
    /// Unknown keys throw std::invalid_argument.
    void apply_overrides(const std::string& spec);

    static const std::map<std::string, std::string>& known_keys();
};

} // namespace sumdist
