#include "sumdist/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace sumdist {

namespace {

struct Field {
    std::string doc;
    std::function<void(Config&, const std::string&)> set;
};

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad numeric value '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw std::invalid_argument("bad boolean value '" + v + "'");
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = {
        {"c_gauss_cols", {"Gaussian estimator columns", [](Config& c, const std::string& v) { c.c_gauss_cols = parse_double(v); }}},
        {"c_sketch_cols", {"poly_approx sketch columns", [](Config& c, const std::string& v) { c.c_sketch_cols = parse_double(v); }}},
        {"c_lewis_samples", {"Lewis sample count", [](Config& c, const std::string& v) { c.c_lewis_samples = parse_double(v); }}},
        {"c_eps_samples", {"eps_approx sample count", [](Config& c, const std::string& v) { c.c_eps_samples = parse_double(v); }}},
        {"c_countsketch_rows", {"CountSketch rows", [](Config& c, const std::string& v) { c.c_countsketch_rows = parse_double(v); }}},
        {"c_cauchy_rows", {"dense-path Cauchy rows", [](Config& c, const std::string& v) { c.c_cauchy_rows = parse_double(v); }}},
        {"c_dense_samples", {"dense-path sample count", [](Config& c, const std::string& v) { c.c_dense_samples = parse_double(v); }}},
        {"c_dense_embed", {"dense-path embedding rows", [](Config& c, const std::string& v) { c.c_dense_embed = parse_double(v); }}},
        {"trial_delta_floor", {"per-trial failure prob floor", [](Config& c, const std::string& v) { c.trial_delta_floor = parse_double(v); }}},
        {"K_default", {"trust factor for eps_approx", [](Config& c, const std::string& v) { c.K_default = parse_double(v); }}},
        {"c_eps_inner", {"inner eps divisor", [](Config& c, const std::string& v) { c.c_eps_inner = parse_double(v); }}},
        {"c_check", {"consistency window divisor", [](Config& c, const std::string& v) { c.c_check = parse_double(v); }}},
        {"deterministic_istar", {"fix i* at the max", [](Config& c, const std::string& v) { c.deterministic_istar = parse_bool(v); }}},
        {"exact_cost_selection", {"exact trial selection", [](Config& c, const std::string& v) { c.exact_cost_selection = parse_bool(v); }}},
        {"lewis_iterations", {"Lewis iteration count (0=auto)", [](Config& c, const std::string& v) { c.lewis_iterations = static_cast<int>(parse_double(v)); }}},
        {"embed_alpha_min", {"Lewis certification alpha", [](Config& c, const std::string& v) { c.embed_alpha_min = parse_double(v); }}},
        {"embed_beta_max", {"Lewis certification beta", [](Config& c, const std::string& v) { c.embed_beta_max = parse_double(v); }}},
        {"cauchy_alpha_min", {"Cauchy certification alpha", [](Config& c, const std::string& v) { c.cauchy_alpha_min = parse_double(v); }}},
        {"cauchy_beta_max", {"Cauchy certification beta", [](Config& c, const std::string& v) { c.cauchy_beta_max = parse_double(v); }}},
        {"embed_retries", {"embedding retries", [](Config& c, const std::string& v) { c.embed_retries = static_cast<int>(parse_double(v)); }}},
        {"embed_test_directions", {"embedding test directions", [](Config& c, const std::string& v) { c.embed_test_directions = static_cast<int>(parse_double(v)); }}},
        {"c_subspace_coreset", {"subspace coreset budget", [](Config& c, const std::string& v) { c.c_subspace_coreset = parse_double(v); }}},
        {"c_kmedian_coreset", {"k-median coreset budget", [](Config& c, const std::string& v) { c.c_kmedian_coreset = parse_double(v); }}},
        {"coreset_fraction", {"coreset size cap fraction", [](Config& c, const std::string& v) { c.coreset_fraction = parse_double(v); }}},
        {"seed_candidates", {"local search candidates (0=auto)", [](Config& c, const std::string& v) { c.seed_candidates = static_cast<int>(parse_double(v)); }}},
        {"rank_threshold", {"rank-revealing QR threshold", [](Config& c, const std::string& v) { c.rank_threshold = parse_double(v); }}},
        {"sv_cutoff", {"pseudoinverse SV cutoff", [](Config& c, const std::string& v) { c.sv_cutoff = parse_double(v); }}},
        {"residual_stop", {"adaptive loop stopping residual", [](Config& c, const std::string& v) { c.residual_stop = parse_double(v); }}},
    };
    return f;
}

} // namespace

void Config::apply_overrides(const std::string& spec) {
    std::string token;
    std::stringstream ss(spec);
    while (std::getline(ss, token, ',')) {
        // also allow whitespace separation inside a token list
        std::stringstream ws(token);
        std::string kv;
        while (ws >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config override '" + kv + "' is not key=value");
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            auto it = fields().find(key);
            if (it == fields().end())
                throw std::invalid_argument("unknown config key '" + key + "'");
            it->second.set(*this, val);
        }
    }
}

const std::map<std::string, std::string>& Config::known_keys() {
    static const std::map<std::string, std::string> docs = [] {
        std::map<std::string, std::string> d;
        for (const auto& [k, f] : fields()) d[k] = f.doc;
        return d;
    }();
    return docs;
}

} // namespace sumdist
