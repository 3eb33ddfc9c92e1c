#pragma once

#include "sumdist/coreset.hpp"
#include "sumdist/dimreduce.hpp"
#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"

#include <string>
#include <vector>

namespace sumdist {

enum class InputFormat { Csv, MatrixMarket };

/// Reads points from disk. CSV rows become dense rows (numeric cells only);
/// matrix-market coordinate files load into sparse storage. Parse errors
/// carry the offending line number.
PointMatrix ingest(const std::string& path, InputFormat format);

void write_csv(const std::string& path, const Eigen::Ref<const Matrix>& m);

enum class NoiseKind { Cauchy, Gaussian };

struct SynthData {
    PointMatrix points;
    Matrix centers; // k x d
};

/// k random centers; samples_per_center points around each with i.i.d.
/// per-coordinate noise of the chosen family. Requires k*samples_per_center == n.
SynthData synth_generate(Index n, Index d, Index k, Index samples_per_center, NoiseKind noise,
                         double scale, const RngConfig& rng);

// ---------------------------------------------------------------------------
// ReducedRep serialization: binary header (n, d, c as u64, eps as f64,
// seed as u64), then B column-major, coords row-major, residuals; all values
// little-endian 64-bit. A JSON sidecar at <path>.json mirrors the header.
// ---------------------------------------------------------------------------

void write_reduced_rep(const std::string& path, const ReducedRep& rep);
ReducedRep read_reduced_rep(const std::string& path);

/// Coreset serialization: JSON with a reference to the basis file (path and
/// content hash) plus one (index, weight, coords, residual) entry per row.
void write_coreset_json(const std::string& path, const WeightedCoreset& cs,
                        const std::string& basis_ref_path);
WeightedCoreset read_coreset_json(const std::string& path, const Basis& basis);

/// FNV-1a over a file's bytes; the basis reference hash.
std::uint64_t file_hash(const std::string& path);

// ---------------------------------------------------------------------------
// Shape specs: JSON array of {"type": "centers"|"subspace"|"union", ...}.
// ---------------------------------------------------------------------------

std::vector<Shape> read_shapes_json(const std::string& path);
void write_shapes_json(const std::string& path, const std::vector<Shape>& shapes);

} // namespace sumdist
