#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wavefront/expression.hpp"
#include "wavefront/harness.hpp"
#include "wavefront/io_util.hpp"

namespace wavefront::harness {

namespace {

[[noreturn]] void fail(const ExperimentConfig& cfg, const std::string& what) {
    throw ConfigError("config violation in " + cfg.source + ": " + what);
}

[[noreturn]] void invariant(const ExperimentConfig& cfg, const std::string& name, const std::string& detail) {
    fail(cfg, "invariant '" + name + "' violated: " + detail);
}

void check_keys(const ExperimentConfig& cfg, const YAML::Node& node, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) fail(cfg, "section '" + section + "' must be a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) fail(cfg, "unknown key '" + key + "' in section '" + section + "'");
    }
}

template <class T>
T get(const ExperimentConfig& cfg, const YAML::Node& node, const std::string& where) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(cfg, "bad value for '" + where + "'");
    }
}

template <class T>
void read(const ExperimentConfig& cfg, const YAML::Node& parent, const char* key, T& out, const std::string& section) {
    if (const auto n = parent[key]) out = get<T>(cfg, n, section + "." + key);
}

std::vector<double> read_list(const ExperimentConfig& cfg, const YAML::Node& node, const std::string& where) {
    if (node.IsScalar()) return {get<double>(cfg, node, where)};
    if (!node.IsSequence()) fail(cfg, "'" + where + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& v : node) out.push_back(get<double>(cfg, v, where));
    return out;
}

RVec to_rvec(const std::vector<double>& v) { return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size())); }

CVec read_complex_point(const ExperimentConfig& cfg, const YAML::Node& node, const std::string& where) {
    check_keys(cfg, node, where, {"re", "im"});
    auto re = read_list(cfg, node["re"], where + ".re");
    auto im = node["im"] ? read_list(cfg, node["im"], where + ".im") : std::vector<double>(re.size(), 0.0);
    if (re.size() != im.size()) fail(cfg, "'" + where + "': re and im have different lengths");
    CVec z(static_cast<Eigen::Index>(re.size()));
    for (std::size_t j = 0; j < re.size(); ++j) z[static_cast<Eigen::Index>(j)] = cplx(re[j], im[j]);
    return z;
}

std::vector<CVec> read_complex_points(const ExperimentConfig& cfg, const YAML::Node& node, const std::string& where) {
    if (!node.IsSequence()) fail(cfg, "'" + where + "' must be a list of {re, im} points");
    std::vector<CVec> out;
    for (const auto& p : node) out.push_back(read_complex_point(cfg, p, where));
    return out;
}

bool is_zero_expression(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    return t == "0" || t == "0.0";
}

void read_field(ExperimentConfig& cfg, const YAML::Node& node) {
    if (node.IsScalar()) {
        cfg.field_name = node.as<std::string>();
        auto f = coeffs::make_builtin(cfg.field_name);
        if (!f) fail(cfg, "unknown field '" + cfg.field_name + "'");
        cfg.field = *f;
        cfg.field_echo = {{"name", cfg.field_name}};
        return;
    }
    check_keys(cfg, node, "field", {"name", "c", "n", "a2", "a1", "a0", "sigma", "c0", "nu"});
    if (!node["name"]) fail(cfg, "field.name is required");
    cfg.field_name = get<std::string>(cfg, node["name"], "field.name");
    cfg.field_echo = {{"name", cfg.field_name}};
    if (cfg.field_name != "custom") {
        std::optional<double> c;
        if (node["c"]) {
            c = get<double>(cfg, node["c"], "field.c");
            cfg.field_echo["c"] = *c;
        }
        auto f = coeffs::make_builtin(cfg.field_name, c);
        if (!f) fail(cfg, "unknown field '" + cfg.field_name + "'");
        cfg.field = *f;
        return;
    }

    coeffs::CoefficientField f;
    f.name = "custom";
    read(cfg, node, "n", f.n, "field");
    read(cfg, node, "sigma", f.sigma, "field");
    read(cfg, node, "c0", f.c0, "field");
    read(cfg, node, "nu", f.nu, "field");
    if (f.n < 1) fail(cfg, "field.n must be positive");
    const int n = f.n;
    auto compile = [&](const std::string& text, const std::string& where) {
        try {
            return coeffs::parse_expression(text, n);
        } catch (const coeffs::ParseError& e) {
            fail(cfg, "cannot parse " + where + ": " + e.what());
        }
    };

    std::vector<std::vector<std::string>> a2(n, std::vector<std::string>(n, "0"));
    for (int j = 0; j < n; ++j) a2[j][j] = "1";
    if (const auto m = node["a2"]) {
        if (!m.IsSequence() || static_cast<int>(m.size()) != n) fail(cfg, "field.a2 must be an n x n list");
        for (int j = 0; j < n; ++j) {
            if (!m[j].IsSequence() || static_cast<int>(m[j].size()) != n) fail(cfg, "field.a2 must be an n x n list");
            for (int k = 0; k < n; ++k) a2[j][k] = get<std::string>(cfg, m[j][k], "field.a2");
        }
    }
    std::vector<std::string> a1(n, "0");
    if (const auto v = node["a1"]) {
        if (!v.IsSequence() || static_cast<int>(v.size()) != n) fail(cfg, "field.a1 must be a list of n expressions");
        for (int j = 0; j < n; ++j) a1[j] = get<std::string>(cfg, v[j], "field.a1");
    }
    std::string a0 = "0";
    read(cfg, node, "a0", a0, "field");

    bool identity = true;
    f.a2.assign(n, std::vector<coeffs::Evaluator>(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            f.a2[j][k] = compile(a2[j][k], "field.a2[" + std::to_string(j) + "][" + std::to_string(k) + "]");
            std::string t;
            for (char c : a2[j][k])
                if (!std::isspace(static_cast<unsigned char>(c))) t += c;
            identity = identity && (j == k ? (t == "1" || t == "1.0") : is_zero_expression(t));
        }
    f.a1.resize(n);
    bool no_a1 = true;
    for (int j = 0; j < n; ++j) {
        f.a1[j] = compile(a1[j], "field.a1[" + std::to_string(j) + "]");
        no_a1 = no_a1 && is_zero_expression(a1[j]);
    }
    f.a0 = compile(a0, "field.a0");
    f.metric_is_identity = identity;
    f.first_order_vanishes = no_a1;
    f.potential_vanishes = is_zero_expression(a0);
    cfg.field = std::move(f);
    cfg.field_echo.update({{"n", n}, {"a2", a2}, {"a1", a1}, {"a0", a0}, {"sigma", cfg.field.sigma},
                           {"c0", cfg.field.c0}, {"nu", cfg.field.nu}});
}

void read_seeds(ExperimentConfig& cfg, const YAML::Node& node) {
    check_keys(cfg, node, "seeds", {"x", "xi", "points", "random"});
    const int n = cfg.field.n;
    if (node["x"] || node["xi"]) {
        if (!node["x"] || !node["xi"]) fail(cfg, "seeds.x and seeds.xi must be given together");
        if (n != 1) fail(cfg, "seeds.x/seeds.xi product grids need n = 1; use seeds.points");
        for (double x : read_list(cfg, node["x"], "seeds.x"))
            for (double xi : read_list(cfg, node["xi"], "seeds.xi"))
                cfg.seeds.push_back({RVec::Constant(1, x), RVec::Constant(1, xi)});
    }
    if (const auto pts = node["points"]) {
        if (!pts.IsSequence()) fail(cfg, "seeds.points must be a list");
        for (const auto& p : pts) {
            check_keys(cfg, p, "seeds.points", {"x", "xi"});
            auto x = read_list(cfg, p["x"], "seeds.points.x");
            auto xi = read_list(cfg, p["xi"], "seeds.points.xi");
            if (static_cast<int>(x.size()) != n || static_cast<int>(xi.size()) != n)
                fail(cfg, "seeds.points entries must have n = " + std::to_string(n) + " components");
            cfg.seeds.push_back({to_rvec(x), to_rvec(xi)});
        }
    }
    if (const auto r = node["random"]) {
        check_keys(cfg, r, "seeds.random", {"count", "x_range", "xi_range"});
        read(cfg, r, "count", cfg.random_seeds.count, "seeds.random");
        if (r["x_range"]) {
            auto v = read_list(cfg, r["x_range"], "seeds.random.x_range");
            if (v.size() != 2 || v[0] > v[1]) fail(cfg, "seeds.random.x_range must be [min, max]");
            cfg.random_seeds.x_min = v[0];
            cfg.random_seeds.x_max = v[1];
        }
        if (r["xi_range"]) {
            auto v = read_list(cfg, r["xi_range"], "seeds.random.xi_range");
            if (v.size() != 2 || v[0] > v[1] || v[0] <= 0) fail(cfg, "seeds.random.xi_range must be [min, max] with 0 < min");
            cfg.random_seeds.xi_min = v[0];
            cfg.random_seeds.xi_max = v[1];
        }
        if (cfg.random_seeds.count < 0) fail(cfg, "seeds.random.count must be non-negative");
    }
}

void read_data(ExperimentConfig& cfg, const YAML::Node& node) {
    if (!node.IsSequence()) fail(cfg, "'data' must be a list");
    for (const auto& d : node) {
        check_keys(cfg, d, "data", {"kind", "x0", "width", "omega", "refocus", "name"});
        DataSpec s;
        read(cfg, d, "kind", s.kind, "data");
        read(cfg, d, "x0", s.x0, "data");
        read(cfg, d, "width", s.width, "data");
        read(cfg, d, "omega", s.omega, "data");
        read(cfg, d, "refocus", s.refocus, "data");
        read(cfg, d, "name", s.name, "data");
        if (s.kind != "gaussian" && s.kind != "jump" && s.kind != "flat")
            fail(cfg, "unknown data kind '" + s.kind + "' (gaussian, jump, flat)");
        if (!(s.width > 0)) fail(cfg, "data.width must be positive");
        cfg.data.push_back(s);
    }
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_invariants(const ExperimentConfig& cfg) {
    for (double t : cfg.times)
        if (!(t > 0)) invariant(cfg, "t > 0", "times contains " + num(t) + " (use time_reversal for backward runs)");
    for (const auto& s : cfg.all_seeds()) {
        if (static_cast<int>(s.x.size()) != cfg.field.n)
            invariant(cfg, "seed dimension = n", "a seed has " + std::to_string(s.x.size()) + " components");
        if (s.xi.norm() == 0.0) invariant(cfg, "xi != 0 for every seed", "seed at x = " + num(s.x[0]) + " has xi = 0");
    }
    if (cfg.h_grid.empty()) invariant(cfg, "h_grid non-empty", "fbi.h_grid is empty");
    for (std::size_t i = 0; i < cfg.h_grid.size(); ++i) {
        if (!(cfg.h_grid[i] > 0)) invariant(cfg, "h > 0", "fbi.h_grid contains " + num(cfg.h_grid[i]));
        if (i > 0 && !(cfg.h_grid[i] < cfg.h_grid[i - 1])) invariant(cfg, "h_grid decreasing", "fbi.h_grid is not strictly decreasing");
    }
    if (!is_power_of_two(cfg.grid.N)) invariant(cfg, "N power of two", "grid.N = " + std::to_string(cfg.grid.N));
    if (!is_power_of_two(cfg.grid.refine)) invariant(cfg, "refine power of two", "grid.refine = " + std::to_string(cfg.grid.refine));
    if (!(cfg.grid.L > 0)) invariant(cfg, "L > 0", "grid.L = " + num(cfg.grid.L));
    const double hmin = *std::min_element(cfg.h_grid.begin(), cfg.h_grid.end());
    if (cfg.grid.analysis_dx() > hmin / 4.0)
        invariant(cfg, "dx <= min(h_grid)/4",
                  "analysis dx = 2L/(N*refine) = " + num(cfg.grid.analysis_dx()) + " > " + num(hmin / 4.0));
    if (!(cfg.thresholds.delta_sing < cfg.thresholds.delta_reg))
        invariant(cfg, "delta_sing < delta_reg", num(cfg.thresholds.delta_sing) + " >= " + num(cfg.thresholds.delta_reg));
    if (cfg.max_undetermined < 0 || cfg.max_undetermined > 1) invariant(cfg, "0 <= max_undetermined <= 1", num(cfg.max_undetermined));
    if (cfg.contour.R <= 1.0) invariant(cfg, "contour R > 1", "contour.R = " + num(cfg.contour.R));
    for (const auto& z : cfg.saddle.z)
        if (z.size() != cfg.field.n) invariant(cfg, "saddle point dimension = n", "saddle.z entry has " + std::to_string(z.size()) + " components");
    for (const auto& z : cfg.contour.z)
        if (z.size() != cfg.field.n) invariant(cfg, "contour point dimension = n", "contour.z entry has " + std::to_string(z.size()) + " components");
    for (const auto& d : cfg.data)
        if (d.refocus < 0) invariant(cfg, "refocus >= 0", "data '" + d.label() + "' has refocus " + num(d.refocus));
}

}  // namespace

std::vector<flow::PhasePoint> ExperimentConfig::all_seeds() const {
    std::vector<flow::PhasePoint> out = seeds;
    if (random_seeds.count > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(random_seeds.x_min, random_seeds.x_max);
        std::uniform_real_distribution<double> uxi(random_seeds.xi_min, random_seeds.xi_max);
        std::bernoulli_distribution sign(0.5);
        const int n = field.n;
        for (int i = 0; i < random_seeds.count; ++i) {
            RVec x(n), xi(n);
            for (int j = 0; j < n; ++j) x[j] = ux(rng);
            // |xi| in range along a random axis direction
            RVec dir = RVec::Zero(n);
            dir[0] = 1.0;
            if (n > 1) {
                std::normal_distribution<double> g;
                for (int j = 0; j < n; ++j) dir[j] = g(rng);
                dir.normalize();
            }
            xi = (sign(rng) ? -1.0 : 1.0) * uxi(rng) * dir;
            out.push_back({x, xi});
        }
    }
    return out;
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::string& source) {
    ExperimentConfig cfg;
    cfg.source = source;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        fail(cfg, std::string("YAML syntax error: ") + e.what());
    }
    if (!root.IsMap()) fail(cfg, "top level must be a mapping");
    check_keys(cfg, root, "top level",
               {"field", "grid", "times", "time_reversal", "data", "seeds", "controls", "fbi", "flow",
                "wave_operator", "propagation", "acceptance", "validate", "egorov", "saddle", "contour", "output",
                "run"});

    if (!root["field"]) fail(cfg, "'field' is required");
    read_field(cfg, root["field"]);

    if (const auto g = root["grid"]) {
        check_keys(cfg, g, "grid", {"L", "N", "refine"});
        read(cfg, g, "L", cfg.grid.L, "grid");
        read(cfg, g, "N", cfg.grid.N, "grid");
        read(cfg, g, "refine", cfg.grid.refine, "grid");
    }
    if (const auto t = root["times"]) cfg.times = read_list(cfg, t, "times");
    read(cfg, root, "time_reversal", cfg.time_reversal, "top level");
    if (const auto d = root["data"]) read_data(cfg, d);

    if (const auto r = root["run"]) {
        check_keys(cfg, r, "run", {"threads", "seed"});
        read(cfg, r, "threads", cfg.threads, "run");
        read(cfg, r, "seed", cfg.seed, "run");
    }
    if (const auto s = root["seeds"]) read_seeds(cfg, s);

    if (const auto c = root["controls"]) {
        check_keys(cfg, c, "controls", {"enabled", "offset"});
        read(cfg, c, "enabled", cfg.controls, "controls");
        read(cfg, c, "offset", cfg.control_offset, "controls");
    }
    if (const auto f = root["fbi"]) {
        check_keys(cfg, f, "fbi", {"h_grid", "omega_radius", "delta_reg", "delta_sing", "r2_min", "noise_rel", "band_sigmas"});
        if (f["h_grid"]) cfg.h_grid = read_list(cfg, f["h_grid"], "fbi.h_grid");
        read(cfg, f, "omega_radius", cfg.omega_radius, "fbi");
        read(cfg, f, "delta_reg", cfg.thresholds.delta_reg, "fbi");
        read(cfg, f, "delta_sing", cfg.thresholds.delta_sing, "fbi");
        read(cfg, f, "r2_min", cfg.thresholds.r2_min, "fbi");
        read(cfg, f, "noise_rel", cfg.thresholds.noise_rel, "fbi");
        read(cfg, f, "band_sigmas", cfg.thresholds.band_sigmas, "fbi");
    }
    if (const auto f = root["flow"]) {
        check_keys(cfg, f, "flow", {"tol", "horizon", "escape_radius", "t_end", "classify_tol"});
        read(cfg, f, "tol", cfg.flow_tol, "flow");
        read(cfg, f, "horizon", cfg.classify.horizon, "flow");
        read(cfg, f, "escape_radius", cfg.classify.escape_radius, "flow");
        read(cfg, f, "t_end", cfg.flow_t_end, "flow");
        read(cfg, f, "classify_tol", cfg.classify.tol, "flow");
    }
    if (const auto w = root["wave_operator"]) {
        check_keys(cfg, w, "wave_operator", {"tol", "t0", "max_horizon", "richardson_levels"});
        read(cfg, w, "tol", cfg.wave_tol, "wave_operator");
        read(cfg, w, "t0", cfg.wave.t0, "wave_operator");
        read(cfg, w, "max_horizon", cfg.wave.max_horizon, "wave_operator");
        read(cfg, w, "richardson_levels", cfg.wave.richardson_levels, "wave_operator");
    }
    if (const auto p = root["propagation"]) {
        check_keys(cfg, p, "propagation", {"tol", "krylov_dim"});
        read(cfg, p, "tol", cfg.krylov_tol, "propagation");
        read(cfg, p, "krylov_dim", cfg.krylov.max_dim, "propagation");
    }
    if (const auto a = root["acceptance"]) {
        check_keys(cfg, a, "acceptance", {"min_agreement", "max_undetermined"});
        read(cfg, a, "min_agreement", cfg.min_agreement, "acceptance");
        read(cfg, a, "max_undetermined", cfg.max_undetermined, "acceptance");
    }
    if (const auto v = root["validate"]) {
        check_keys(cfg, v, "validate", {"random_points"});
        read(cfg, v, "random_points", cfg.validate_random_points, "validate");
    }
    if (const auto e = root["egorov"]) {
        check_keys(cfg, e, "egorov", {"f", "times", "h_grid", "L", "N", "min_order"});
        read(cfg, e, "f", cfg.egorov.f, "egorov");
        if (e["times"]) cfg.egorov.times = read_list(cfg, e["times"], "egorov.times");
        if (e["h_grid"]) cfg.egorov.h_grid = read_list(cfg, e["h_grid"], "egorov.h_grid");
        read(cfg, e, "L", cfg.egorov.L, "egorov");
        read(cfg, e, "N", cfg.egorov.N, "egorov");
        read(cfg, e, "min_order", cfg.egorov.min_order, "egorov");
    }
    if (const auto s = root["saddle"]) {
        check_keys(cfg, s, "saddle", {"s", "z", "tol", "gradient_tol", "gap_tol", "sigma_floor"});
        if (s["s"]) cfg.saddle.s = read_list(cfg, s["s"], "saddle.s");
        if (s["z"]) cfg.saddle.z = read_complex_points(cfg, s["z"], "saddle.z");
        read(cfg, s, "tol", cfg.saddle.tol, "saddle");
        read(cfg, s, "gradient_tol", cfg.saddle.gradient_tol, "saddle");
        read(cfg, s, "gap_tol", cfg.saddle.gap_tol, "saddle");
        read(cfg, s, "sigma_floor", cfg.saddle.sigma_floor, "saddle");
    }
    if (const auto c = root["contour"]) {
        check_keys(cfg, c, "contour", {"z", "R", "radius", "samples", "residual_tol"});
        if (c["z"]) cfg.contour.z = read_complex_points(cfg, c["z"], "contour.z");
        read(cfg, c, "R", cfg.contour.R, "contour");
        read(cfg, c, "radius", cfg.contour.radius, "contour");
        read(cfg, c, "samples", cfg.contour.samples, "contour");
        read(cfg, c, "residual_tol", cfg.contour.residual_tol, "contour");
    }
    if (const auto o = root["output"]) {
        check_keys(cfg, o, "output", {"dir", "snapshots"});
        read(cfg, o, "dir", cfg.output_dir, "output");
        read(cfg, o, "snapshots", cfg.snapshots, "output");
    }

    check_invariants(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void require(const ExperimentConfig& cfg, std::initializer_list<Requirement> reqs) {
    for (auto r : reqs) {
        switch (r) {
            case Requirement::seeds:
                if (cfg.all_seeds().empty()) invariant(cfg, "at least one seed", "the 'seeds' section is empty or missing");
                break;
            case Requirement::data:
                if (cfg.data.empty()) invariant(cfg, "at least one initial datum", "the 'data' section is empty or missing");
                break;
            case Requirement::flat_metric: {
                if (cfg.field.metric_is_identity) break;
                auto samples = coeffs::default_sampling(cfg.field.n, cfg.field.nu, cfg.seed, 50);
                for (const auto& x : samples.real_points) {
                    const RMat a = cfg.field.metric(x);
                    if ((a - RMat::Identity(cfg.field.n, cfg.field.n)).cwiseAbs().maxCoeff() > 1e-14)
                        invariant(cfg, "a_jk = delta_jk (flat second-order part)",
                                  "field '" + cfg.field_name + "' has a non-identity metric");
                }
                break;
            }
        }
    }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    auto seeds = json::array();
    for (const auto& s : cfg.all_seeds())
        seeds.push_back({{"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
                         {"xi", std::vector<double>(s.xi.data(), s.xi.data() + s.xi.size())}});
    auto data = json::array();
    for (const auto& d : cfg.data)
        data.push_back({{"label", d.label()}, {"kind", d.kind}, {"x0", d.x0}, {"width", d.width}, {"omega", d.omega},
                        {"refocus", d.refocus}});
    return json{{"source", cfg.source},
                {"field", cfg.field_echo},
                {"grid", {{"L", cfg.grid.L}, {"N", cfg.grid.N}, {"refine", cfg.grid.refine},
                          {"analysis_dx", cfg.grid.analysis_dx()}}},
                {"times", cfg.times},
                {"time_reversal", cfg.time_reversal},
                {"data", data},
                {"seeds", seeds},
                {"controls", {{"enabled", cfg.controls}, {"offset", cfg.control_offset}}},
                {"fbi", {{"h_grid", cfg.h_grid}, {"omega_radius", cfg.omega_radius},
                         {"delta_reg", cfg.thresholds.delta_reg}, {"delta_sing", cfg.thresholds.delta_sing},
                         {"r2_min", cfg.thresholds.r2_min}, {"noise_rel", cfg.thresholds.noise_rel},
                         {"band_sigmas", cfg.thresholds.band_sigmas}}},
                {"flow", {{"tol", cfg.flow_tol}, {"horizon", cfg.classify.horizon},
                          {"escape_radius", cfg.classify.escape_radius}, {"classify_tol", cfg.classify.tol},
                          {"t_end", cfg.flow_t_end}}},
                {"wave_operator", {{"tol", cfg.wave_tol}, {"t0", cfg.wave.t0}, {"max_horizon", cfg.wave.max_horizon},
                                   {"richardson_levels", cfg.wave.richardson_levels}}},
                {"propagation", {{"tol", cfg.krylov_tol}, {"krylov_dim", cfg.krylov.max_dim}}},
                {"acceptance", {{"min_agreement", cfg.min_agreement}, {"max_undetermined", cfg.max_undetermined}}},
                {"seed", cfg.seed}};
}

}  // namespace wavefront::harness
