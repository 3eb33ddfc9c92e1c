#pragma once

#include "sumdist/config.hpp"
#include "sumdist/dimreduce.hpp"
#include "sumdist/io.hpp"
#include "sumdist/point_matrix.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sumdist {

enum class PipelinePath { Sparse, Dense };

struct SynthSpec {
    Index n = 0;
    Index d = 0;
    Index samples_per_center = 0;
    NoiseKind noise = NoiseKind::Cauchy;
    double scale = 1.0;
};

struct ResultRecord {
    std::string method; // paper | random_subspace | top_svd
    Index subspace_dim = 0;
    Index shape_id = 0;
    double approx_cost = 0.0;
    double exact_cost = 0.0;
    double ratio = 0.0;
    std::int64_t wall_time_ms = 0;
};

struct ExperimentConfig {
    std::string input_path;             // empty when synth is set
    InputFormat format = InputFormat::Csv;
    std::optional<SynthSpec> synth;

    Index k = 1;
    double eps = 0.5;
    std::uint64_t seed = 0;
    PipelinePath path = PipelinePath::Sparse;
    Index blocks = 0;                   // dense path; 0 = formula

    std::vector<Index> dims_to_probe;   // ascending; truncations of the final basis
    std::vector<Shape> shapes;          // explicit queries
    bool query_planted_centers = true;  // synth only
    Index random_center_shapes = 0;
    Index random_subspace_shapes = 0;

    Config constants;
    bool emit_stats = false;            // adds wall times (non-deterministic output)

    /// Streaming sink; called once per finished record so partial results
    /// survive a mid-run failure. The full list is still returned.
    std::function<void(const ResultRecord&)> on_record;
};

struct BaselineBases {
    Basis random;
    Basis top_svd;
};

/// Random orthonormal d x dims basis plus the leading right singular vectors
/// of A at the same dimension.
BaselineBases baseline_subspaces(const PointMatrix& a, Index dims, const RngConfig& rng);

struct ExperimentOutput {
    std::vector<ResultRecord> records;
    std::vector<Shape> shapes;
    Basis final_basis;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

void append_record_ndjson(std::ostream& out, const ResultRecord& record);
void append_record_csv(std::ostream& out, const ResultRecord& record);
void write_csv_header(std::ostream& out);

void write_records_ndjson(std::ostream& out, const std::vector<ResultRecord>& records);
void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records);

} // namespace sumdist
