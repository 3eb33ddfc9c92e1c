#include "sumdist/experiment.hpp"
#include "sumdist/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace sumdist;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "sumdist_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Matrix random_matrix(Index n, Index m, std::uint64_t seed) {
    auto eng = make_engine(RngConfig{seed, 0});
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) out(i, j) = normal(eng);
    return out;
}

} // namespace

TEST_CASE("csv ingestion") {
    fs::path dir = temp_dir();
    write_file(dir / "ok.csv", "1,2\n3,4\n");
    PointMatrix a = ingest((dir / "ok.csv").string(), InputFormat::Csv);
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 2);
    CHECK(a.dense()(1, 0) == 3.0);

    write_file(dir / "ragged.csv", "1,2\n3,4,5\n");
    CHECK_THROWS_WITH_AS(ingest((dir / "ragged.csv").string(), InputFormat::Csv),
                         doctest::Contains(":2:"), std::runtime_error);

    write_file(dir / "alpha.csv", "1,x\n");
    CHECK_THROWS_AS(ingest((dir / "alpha.csv").string(), InputFormat::Csv), std::runtime_error);
}

TEST_CASE("matrix market ingestion") {
    fs::path dir = temp_dir();
    write_file(dir / "ok.mm",
               "%%MatrixMarket matrix coordinate real general\n"
               "% comment\n"
               "3 4 3\n"
               "1 1 1.5\n"
               "2 3 -2\n"
               "3 4 7\n");
    PointMatrix a = ingest((dir / "ok.mm").string(), InputFormat::MatrixMarket);
    CHECK(a.is_sparse());
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 4);
    CHECK(a.nnz() == 3);
    CHECK(a.row(1)(2) == -2.0);

    write_file(dir / "bad.mm", "1 2 3\n");
    CHECK_THROWS(ingest((dir / "bad.mm").string(), InputFormat::MatrixMarket));
}

TEST_CASE("synth_generate basics") {
    SynthData exact = synth_generate(12, 5, 3, 4, NoiseKind::Cauchy, 0.0, RngConfig{1, 0});
    CHECK(exact.points.rows() == 12);
    for (Index i = 0; i < 12; ++i)
        CHECK((exact.points.row(i) - exact.centers.row(i / 4).transpose()).norm() == 0.0);

    CHECK_THROWS_AS(synth_generate(10, 5, 3, 4, NoiseKind::Cauchy, 1.0, RngConfig{1, 0}),
                    std::invalid_argument);

    // gaussian noise at unit scale: mean within-cluster distance is about sqrt(d)
    SynthData g = synth_generate(400, 100, 2, 200, NoiseKind::Gaussian, 1.0, RngConfig{2, 0});
    double mean_dist = 0.0;
    for (Index i = 0; i < 400; ++i)
        mean_dist += (g.points.row(i) - g.centers.row(i / 200).transpose()).norm() / 400.0;
    CHECK(mean_dist == doctest::Approx(std::sqrt(100.0)).epsilon(0.1));
}

TEST_CASE("synth_generate at the headline configuration" * doctest::skip(false)) {
    SynthData big = synth_generate(10000, 10000, 5, 2000, NoiseKind::Cauchy, 1.0, RngConfig{3, 0});
    CHECK(big.points.rows() == 10000);
    CHECK(big.points.cols() == 10000);
    CHECK(big.centers.rows() == 5);
}

TEST_CASE("reduced rep serialization round trip") {
    fs::path dir = temp_dir();
    Matrix pts = random_matrix(25, 7, 10);
    Basis b = orthonormal_columns(random_matrix(7, 3, 11));
    ReducedRep rep = extract_reduced_rep(PointMatrix(pts), b, 0.4, RngConfig{12, 0});
    rep.seed = 99;

    const std::string path = (dir / "rep.bin").string();
    write_reduced_rep(path, rep);

    // structural size: header + basis + coords + residuals, 8 bytes each
    const auto expect = 5 * 8 + 8 * (7 * 3 + 25 * 3 + 25);
    CHECK(fs::file_size(path) == static_cast<std::uintmax_t>(expect));
    CHECK(fs::exists(path + ".json"));

    ReducedRep back = read_reduced_rep(path);
    CHECK(back.eps == rep.eps);
    CHECK(back.seed == 99);
    CHECK((back.basis.cols - rep.basis.cols).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.coords - rep.coords).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.residuals - rep.residuals).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reduced rep serialization handles the empty basis") {
    fs::path dir = temp_dir();
    ReducedRep rep;
    rep.basis = Basis::empty(9);
    rep.coords = Matrix(4, 0);
    rep.residuals = Vector::LinSpaced(4, 1.0, 4.0);
    rep.eps = 0.7;
    rep.seed = 3;
    const std::string path = (dir / "empty.bin").string();
    write_reduced_rep(path, rep);
    CHECK(fs::file_size(path) == 5 * 8 + 8 * 4);
    ReducedRep back = read_reduced_rep(path);
    CHECK(back.basis.subspace_dim() == 0);
    CHECK(back.basis.ambient_dim() == 9);
    CHECK((back.residuals - rep.residuals).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cli reduce accepts matrix market input") {
    fs::path dir = temp_dir() / "mm_cli";
    fs::create_directories(dir);
    // sparse three-cluster toy data in coordinate format
    std::ostringstream mm;
    Matrix pts = random_matrix(30, 10, 70);
    for (Index i = 0; i < pts.rows(); ++i)
        for (Index j = 0; j < pts.cols(); ++j)
            if ((i + j) % 2 != 0) pts(i, j) = 0.0;
    std::vector<std::string> lines;
    for (Index i = 0; i < pts.rows(); ++i)
        for (Index j = 0; j < pts.cols(); ++j)
            if (pts(i, j) != 0.0)
                lines.push_back(std::to_string(i + 1) + " " + std::to_string(j + 1) + " " +
                                std::to_string(pts(i, j)));
    mm << "%%MatrixMarket matrix coordinate real general\n30 10 " << lines.size() << "\n";
    for (const auto& l : lines) mm << l << '\n';
    write_file(dir / "data.mm", mm.str());

    const std::string cli = SUMDIST_CLI_PATH;
    const std::string cmd = cli + " reduce --input " + (dir / "data.mm").string() +
                            " --format mm --k 2 --eps 0.5 --seed 8 --out " +
                            (dir / "rep.bin").string() + " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    ReducedRep rep = read_reduced_rep((dir / "rep.bin").string());
    CHECK(rep.point_count() == 30);
}

TEST_CASE("coreset json round trip keeps the basis reference") {
    fs::path dir = temp_dir();
    Matrix pts = random_matrix(30, 6, 20);
    Basis b = orthonormal_columns(random_matrix(6, 2, 21));
    ReducedRep rep = extract_reduced_rep(PointMatrix(pts), b, 0.4, RngConfig{22, 0});
    const std::string rep_path = (dir / "basis_ref.bin").string();
    write_reduced_rep(rep_path, rep);

    WeightedCoreset cs = subspace_coreset(rep, 2, 0.5, RngConfig{23, 0});
    const std::string cs_path = (dir / "coreset.json").string();
    write_coreset_json(cs_path, cs, rep_path);

    WeightedCoreset back = read_coreset_json(cs_path, b);
    REQUIRE(back.size() == cs.size());
    CHECK((back.weights - cs.weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.coords - cs.coords).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.rows == cs.rows);

    // the block references the basis file by path and content hash
    std::string text = slurp(cs_path);
    CHECK(text.find("basis_ref.bin") != std::string::npos);
    CHECK(text.find("hash") != std::string::npos);
}

TEST_CASE("shape spec json round trip") {
    fs::path dir = temp_dir();
    std::vector<Shape> shapes;
    shapes.emplace_back(CentersShape{random_matrix(2, 4, 30)});
    shapes.emplace_back(SubspaceShape{orthonormal_columns(random_matrix(4, 2, 31))});
    shapes.emplace_back(UnionOfSubspacesShape{{orthonormal_columns(random_matrix(4, 1, 32)),
                                               orthonormal_columns(random_matrix(4, 1, 33))}});
    const std::string path = (dir / "shapes.json").string();
    write_shapes_json(path, shapes);
    std::vector<Shape> back = read_shapes_json(path);
    REQUIRE(back.size() == 3);
    Matrix probe = random_matrix(10, 4, 34);
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        for (Index i = 0; i < probe.rows(); ++i) {
            Vector p = probe.row(i).transpose();
            CHECK(shape_distance(p, back[s]) == doctest::Approx(shape_distance(p, shapes[s])));
        }
    }
}

TEST_CASE("baseline_subspaces spans and errors") {
    Matrix pts = random_matrix(40, 8, 40);
    PointMatrix a(pts);
    BaselineBases bases = baseline_subspaces(a, 8, RngConfig{41, 0});
    CHECK(bases.random.orthonormality_defect() <= 1e-8);
    CHECK(bases.top_svd.orthonormality_defect() <= 1e-8);
    CHECK(bases.random.subspace_dim() == 8);
    // full-dimensional bases reproduce exact costs
    ReducedRep rep = extract_reduced_rep(a, bases.random, 0.4, RngConfig{42, 0});
    Shape s{CentersShape{random_matrix(2, 8, 43)}};
    CHECK(reduced_cost(rep, s) == doctest::Approx(exact_cost(a, s)).epsilon(1e-6));

    CHECK_THROWS_AS(baseline_subspaces(a, 9, RngConfig{44, 0}), std::invalid_argument);

    // exactly rank-r input: the top-r singular subspace is lossless
    Matrix low = random_matrix(40, 2, 45) * random_matrix(2, 8, 46);
    PointMatrix al(low);
    BaselineBases lb = baseline_subspaces(al, 3, RngConfig{47, 0});
    ReducedRep lrep = extract_reduced_rep(al, lb.top_svd, 0.4, RngConfig{48, 0});
    Shape s2{CentersShape{random_matrix(2, 8, 49)}};
    CHECK(reduced_cost(lrep, s2) == doctest::Approx(exact_cost(al, s2)).epsilon(1e-6));
}

TEST_CASE("run_experiment probes dimensions and reports unit ratios at full dim") {
    ExperimentConfig cfg;
    cfg.k = 2;
    cfg.eps = 0.5;
    cfg.seed = 7;
    SynthSpec sp;
    sp.n = 60;
    sp.d = 10;
    sp.samples_per_center = 30;
    sp.noise = NoiseKind::Gaussian;
    sp.scale = 0.5;
    cfg.synth = sp;
    cfg.dims_to_probe = {10};
    cfg.random_center_shapes = 2;
    ExperimentOutput out = run_experiment(cfg);
    REQUIRE(!out.records.empty());
    bool saw_full = false;
    for (const ResultRecord& r : out.records) {
        if (r.subspace_dim == 10) {
            saw_full = true;
            CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-6));
        }
        CHECK(r.wall_time_ms == 0); // deterministic output unless --stats
    }
    CHECK(saw_full);
}

TEST_CASE("run_experiment ingests points from a file") {
    fs::path dir = temp_dir();
    Matrix pts = random_matrix(50, 8, 60);
    write_csv((dir / "exp_input.csv").string(), pts);
    ExperimentConfig cfg;
    cfg.input_path = (dir / "exp_input.csv").string();
    cfg.format = InputFormat::Csv;
    cfg.k = 2;
    cfg.eps = 0.5;
    cfg.seed = 61;
    cfg.query_planted_centers = false;
    cfg.random_center_shapes = 3;
    ExperimentOutput out = run_experiment(cfg);
    CHECK(!out.records.empty());
    for (const ResultRecord& r : out.records) CHECK(r.exact_cost > 0.0);

    // with no query spec at all, a seeded k-median center set is derived
    cfg.random_center_shapes = 0;
    ExperimentOutput derived = run_experiment(cfg);
    CHECK(!derived.records.empty());
    REQUIRE(derived.shapes.size() == 1);
    CHECK(std::holds_alternative<CentersShape>(derived.shapes[0]));
}

TEST_CASE("cli pipeline end to end") {
    fs::path dir = temp_dir() / "cli";
    fs::create_directories(dir);
    const std::string cli = SUMDIST_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    const std::string data = (dir / "data.csv").string();
    const std::string rep = (dir / "rep.bin").string();
    const std::string cs = (dir / "coreset.json").string();
    const std::string shapes = (dir / "shapes.json").string();
    const std::string results = (dir / "results.ndjson").string();

    REQUIRE(run("synth --n 80 --d 12 --k 2 --seed 5 --scale 0.5 --noise gaussian --out " + data) == 0);
    REQUIRE(run("reduce --input " + data + " --k 2 --eps 0.5 --seed 5 --out " + rep) == 0);
    REQUIRE(run("coreset --rep " + rep + " --kind kmedian --k 2 --eps 0.5 --seed 5 --out " + cs) == 0);

    std::vector<Shape> q{Shape{CentersShape{random_matrix(2, 12, 50)}}};
    write_shapes_json(shapes, q);
    REQUIRE(run("evaluate --input " + data + " --rep " + rep + " --shapes " + shapes +
                " --out " + results) == 0);
    std::string nd = slurp(results);
    CHECK(nd.find("\"ratio\"") != std::string::npos);

    // unknown config keys are rejected
    CHECK(run("reduce --input " + data + " --k 2 --eps 0.5 --config bogus_key=3 --out " + rep) != 0);
}

TEST_CASE("cli outputs are byte-identical across reruns") {
    fs::path dir = temp_dir() / "determinism";
    fs::create_directories(dir);
    const std::string cli = SUMDIST_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string data = (dir / "data.csv").string();
    REQUIRE(run("synth --n 50 --d 8 --k 2 --seed 11 --scale 1 --out " + data) == 0);

    const std::string rep1 = (dir / "rep1.bin").string();
    const std::string rep2 = (dir / "rep2.bin").string();
    REQUIRE(run("reduce --input " + data + " --k 2 --eps 0.5 --seed 11 --out " + rep1) == 0);
    REQUIRE(run("reduce --input " + data + " --k 2 --eps 0.5 --seed 11 --out " + rep2) == 0);
    CHECK(slurp(rep1) == slurp(rep2));
    CHECK(slurp(rep1 + ".json") == slurp(rep2 + ".json"));

    const std::string res1 = (dir / "res1.ndjson").string();
    const std::string res2 = (dir / "res2.ndjson").string();
    const std::string exp_args = "experiment --n 60 --d 10 --k 2 --eps 0.5 --seed 3 --scale 0.5 "
                                 "--dims 4,8 --random-center-shapes 2 --out ";
    REQUIRE(run(exp_args + res1) == 0);
    REQUIRE(run(exp_args + res2) == 0);
    CHECK(slurp(res1) == slurp(res2));
    CHECK(!slurp(res1).empty());
}
