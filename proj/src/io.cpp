#include "sumdist/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sumdist {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

double parse_cell(const std::string& path, std::size_t line, const std::string& cell) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        parse_fail(path, line, "non-numeric cell '" + cell + "'");
    return value;
}

PointMatrix ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_cell(path, lineno, cell));
        if (rows.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            parse_fail(path, lineno, "expected " + std::to_string(width) + " columns, got " +
                                         std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return PointMatrix(std::move(m));
}

PointMatrix ingest_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++lineno;
    if (line.rfind("%%MatrixMarket", 0) != 0)
        parse_fail(path, lineno, "missing MatrixMarket banner");
    {
        std::stringstream ss(line);
        std::string banner, object, fmt, field, symmetry;
        ss >> banner >> object >> fmt >> field >> symmetry;
        if (object != "matrix" || fmt != "coordinate")
            parse_fail(path, lineno, "only 'matrix coordinate' files are supported");
        if (field != "real" && field != "integer")
            parse_fail(path, lineno, "only real-valued matrices are supported");
        if (symmetry != "general")
            parse_fail(path, lineno, "only 'general' symmetry is supported");
    }
    Index n = 0;
    Index d = 0;
    Index entries = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (line.empty()) continue;
        std::stringstream ss(line);
        if (!(ss >> n >> d >> entries)) parse_fail(path, lineno, "bad size line");
        break;
    }
    if (n <= 0 || d <= 0) parse_fail(path, lineno, "bad dimensions");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(entries));
    Index seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::stringstream ss(line);
        Index i = 0;
        Index j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v)) parse_fail(path, lineno, "bad entry line");
        if (i < 1 || i > n || j < 1 || j > d) parse_fail(path, lineno, "entry out of bounds");
        triplets.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        ++seen;
    }
    if (seen != entries)
        throw std::runtime_error(path + ": header promised " + std::to_string(entries) +
                                 " entries, found " + std::to_string(seen));
    SparseMatrix sp(n, d);
    sp.setFromTriplets(triplets.begin(), triplets.end());
    return PointMatrix(std::move(sp));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

json basis_to_json(const Basis& b) {
    json cols = json::array();
    for (Index j = 0; j < b.subspace_dim(); ++j) {
        json col = json::array();
        for (Index i = 0; i < b.ambient_dim(); ++i) col.push_back(b.cols(i, j));
        cols.push_back(std::move(col));
    }
    return json{{"ambient", b.ambient_dim()}, {"columns", std::move(cols)}};
}

Basis basis_from_json(const json& j) {
    const Index ambient = j.at("ambient").get<Index>();
    const auto& cols = j.at("columns");
    Matrix m(ambient, static_cast<Index>(cols.size()));
    for (Index c = 0; c < m.cols(); ++c) {
        const auto& col = cols[static_cast<std::size_t>(c)];
        if (static_cast<Index>(col.size()) != ambient)
            throw std::runtime_error("basis column length mismatch");
        for (Index i = 0; i < ambient; ++i) m(i, c) = col[static_cast<std::size_t>(i)].get<double>();
    }
    return Basis(std::move(m));
}

} // namespace

PointMatrix ingest(const std::string& path, InputFormat format) {
    return format == InputFormat::Csv ? ingest_csv(path) : ingest_matrix_market(path);
}

void write_csv(const std::string& path, const Eigen::Ref<const Matrix>& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.precision(17);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

SynthData synth_generate(Index n, Index d, Index k, Index samples_per_center, NoiseKind noise,
                         double scale, const RngConfig& rng) {
    if (n < 1 || d < 1 || k < 1) throw std::invalid_argument("synth_generate: bad dimensions");
    if (k * samples_per_center != n)
        throw std::invalid_argument("synth_generate: need k * samples_per_center == n");
    if (scale < 0.0) throw std::invalid_argument("synth_generate: scale must be >= 0");

    auto eng = make_engine(rng);
    std::normal_distribution<double> normal(0.0, 1.0);

    SynthData out;
    out.centers.resize(k, d);
    for (Index j = 0; j < k; ++j)
        for (Index c = 0; c < d; ++c) out.centers(j, c) = normal(eng);

    Matrix pts(n, d);
    Index row = 0;
    for (Index j = 0; j < k; ++j) {
        for (Index s = 0; s < samples_per_center; ++s, ++row) {
            for (Index c = 0; c < d; ++c) {
                double eta = 0.0;
                if (scale > 0.0) {
                    if (noise == NoiseKind::Gaussian) {
                        eta = scale * normal(eng);
                    } else {
                        double num = 0.0;
                        double den = 0.0;
                        do {
                            num = normal(eng);
                            den = normal(eng);
                        } while (den == 0.0);
                        eta = scale * num / den;
                    }
                }
                pts(row, c) = out.centers(j, c) + eta;
            }
        }
    }
    out.points = PointMatrix(std::move(pts));
    return out;
}

void write_reduced_rep(const std::string& path, const ReducedRep& rep) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const auto n = static_cast<std::uint64_t>(rep.coords.rows());
    const auto d = static_cast<std::uint64_t>(rep.basis.ambient_dim());
    const auto c = static_cast<std::uint64_t>(rep.basis.subspace_dim());
    put_u64(out, n);
    put_u64(out, d);
    put_u64(out, c);
    put_f64(out, rep.eps);
    put_u64(out, rep.seed);
    for (Index j = 0; j < rep.basis.subspace_dim(); ++j)
        for (Index i = 0; i < rep.basis.ambient_dim(); ++i) put_f64(out, rep.basis.cols(i, j));
    for (Index i = 0; i < rep.coords.rows(); ++i)
        for (Index j = 0; j < rep.coords.cols(); ++j) put_f64(out, rep.coords(i, j));
    for (Index i = 0; i < rep.residuals.size(); ++i) put_f64(out, rep.residuals(i));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
    out.close();

    json sidecar{{"n", n}, {"d", d}, {"c", c}, {"eps", rep.eps}, {"seed", rep.seed}};
    std::ofstream side(path + ".json");
    if (!side) throw std::runtime_error("cannot write '" + path + ".json'");
    side << sidecar.dump(2) << '\n';
}

ReducedRep read_reduced_rep(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    const auto n = static_cast<Index>(get_u64(in));
    const auto d = static_cast<Index>(get_u64(in));
    const auto c = static_cast<Index>(get_u64(in));
    ReducedRep rep;
    rep.eps = get_f64(in);
    rep.seed = get_u64(in);
    Matrix basis(d, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < d; ++i) basis(i, j) = get_f64(in);
    rep.basis = Basis(std::move(basis));
    rep.coords.resize(n, c);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < c; ++j) rep.coords(i, j) = get_f64(in);
    rep.residuals.resize(n);
    for (Index i = 0; i < n; ++i) rep.residuals(i) = get_f64(in);
    return rep;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

void write_coreset_json(const std::string& path, const WeightedCoreset& cs,
                        const std::string& basis_ref_path) {
    json rows = json::array();
    for (Index j = 0; j < cs.size(); ++j) {
        json coords = json::array();
        for (Index c = 0; c < cs.coords.cols(); ++c) coords.push_back(cs.coords(j, c));
        rows.push_back(json{{"index", cs.rows[static_cast<std::size_t>(j)]},
                            {"weight", cs.weights(j)},
                            {"coords", std::move(coords)},
                            {"residual", cs.residuals(j)}});
    }
    json doc{{"basis", {{"path", basis_ref_path}, {"hash", file_hash(basis_ref_path)}}},
             {"rows", std::move(rows)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

WeightedCoreset read_coreset_json(const std::string& path, const Basis& basis) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json doc = json::parse(in);
    const auto& rows = doc.at("rows");
    WeightedCoreset cs;
    cs.basis = basis;
    const auto m = static_cast<Index>(rows.size());
    cs.weights.resize(m);
    cs.residuals.resize(m);
    cs.coords.resize(m, basis.subspace_dim());
    for (Index j = 0; j < m; ++j) {
        const auto& row = rows[static_cast<std::size_t>(j)];
        cs.rows.push_back(row.at("index").get<Index>());
        cs.weights(j) = row.at("weight").get<double>();
        cs.residuals(j) = row.at("residual").get<double>();
        const auto& coords = row.at("coords");
        if (static_cast<Index>(coords.size()) != basis.subspace_dim())
            throw std::runtime_error(path + ": coords length does not match basis");
        for (Index c = 0; c < cs.coords.cols(); ++c)
            cs.coords(j, c) = coords[static_cast<std::size_t>(c)].get<double>();
    }
    return cs;
}

std::vector<Shape> read_shapes_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json doc = json::parse(in);
    std::vector<Shape> shapes;
    for (const auto& entry : doc) {
        const std::string type = entry.at("type").get<std::string>();
        if (type == "centers") {
            const auto& pts = entry.at("points");
            Matrix m(static_cast<Index>(pts.size()),
                     static_cast<Index>(pts.empty() ? 0 : pts[0].size()));
            for (Index i = 0; i < m.rows(); ++i)
                for (Index j = 0; j < m.cols(); ++j)
                    m(i, j) = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
            shapes.emplace_back(CentersShape{std::move(m)});
        } else if (type == "subspace") {
            shapes.emplace_back(SubspaceShape{basis_from_json(entry.at("basis"))});
        } else if (type == "union") {
            UnionOfSubspacesShape u;
            for (const auto& part : entry.at("parts")) u.parts.push_back(basis_from_json(part));
            shapes.emplace_back(std::move(u));
        } else {
            throw std::runtime_error(path + ": unknown shape type '" + type + "'");
        }
    }
    return shapes;
}

void write_shapes_json(const std::string& path, const std::vector<Shape>& shapes) {
    json doc = json::array();
    for (const Shape& s : shapes) {
        if (const auto* c = std::get_if<CentersShape>(&s)) {
            json pts = json::array();
            for (Index i = 0; i < c->points.rows(); ++i) {
                json row = json::array();
                for (Index j = 0; j < c->points.cols(); ++j) row.push_back(c->points(i, j));
                pts.push_back(std::move(row));
            }
            doc.push_back(json{{"type", "centers"}, {"points", std::move(pts)}});
        } else if (const auto* v = std::get_if<SubspaceShape>(&s)) {
            doc.push_back(json{{"type", "subspace"}, {"basis", basis_to_json(v->basis)}});
        } else {
            const auto& u = std::get<UnionOfSubspacesShape>(s);
            json parts = json::array();
            for (const Basis& b : u.parts) parts.push_back(basis_to_json(b));
            doc.push_back(json{{"type", "union"}, {"parts", std::move(parts)}});
        }
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

} // namespace sumdist
