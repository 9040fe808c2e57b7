#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "wavefront/commands.hpp"
#include "wavefront/expression.hpp"
#include "wavefront/io_util.hpp"
#include "wavefront/microlocal.hpp"

namespace wavefront::commands {

namespace fs = std::filesystem;
using harness::ExperimentConfig;
using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return f;
}

void write_json(const std::string& dir, const json& j) { open_out(dir, "report.json") << j.dump(2) << '\n'; }

std::string vec_text(const RVec& v) {
    std::string s;
    for (Eigen::Index j = 0; j < v.size(); ++j) s += (j ? ";" : "") + num(v[j]);
    return s;
}

std::string cvec_text(const CVec& v) {
    std::string s;
    for (Eigen::Index j = 0; j < v.size(); ++j) s += (j ? ";" : "") + num(v[j].real()) + (v[j].imag() < 0 ? "" : "+") + num(v[j].imag()) + "i";
    return s;
}

json rjson(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct Context {
    ExperimentConfig& cfg;
    std::string dir;
    std::ostream& log;
};

int validate_metric(Context& c) {
    const auto& cfg = c.cfg;
    auto samples = coeffs::default_sampling(cfg.field.n, cfg.field.nu, cfg.seed, cfg.validate_random_points);
    auto rep = coeffs::validate_assumption_a(cfg.field, samples);
    auto csv = open_out(c.dir, "validation.csv");
    csv << "coefficient,point,ratio,violated\n";
    for (const auto& d : rep.decay)
        csv << d.coefficient << ',' << cvec_text(d.point) << ',' << num(d.ratio) << ',' << (d.violated ? "true" : "false") << '\n';
    write_json(c.dir, {{"field", cfg.field_echo},
                       {"seed", cfg.seed},
                       {"real_points", samples.real_points.size()},
                       {"tube_points", samples.tube_points.size()},
                       {"decay_violations", rep.decay_violations},
                       {"symmetry_violations", rep.symmetry_violations},
                       {"realness_violations", rep.realness_violations},
                       {"definiteness_violations", rep.definiteness_violations},
                       {"nonfinite_values", rep.nonfinite_values},
                       {"max_ratio", rep.max_ratio},
                       {"min_eigenvalue", rep.min_eigenvalue},
                       {"messages", rep.messages},
                       {"passed", rep.passed()}});
    c.log << "validate-metric: " << cfg.field_name << (rep.passed() ? " satisfies" : " violates")
          << " the decay/ellipticity checks (max ratio " << num(rep.max_ratio) << ", min eigenvalue "
          << num(rep.min_eigenvalue) << ")\n";
    for (const auto& m : rep.messages) c.log << "  " << m << '\n';
    return rep.passed() ? kOk : kCheckFailed;
}

int flow_cmd(Context& c) {
    const auto& cfg = c.cfg;
    harness::require(cfg, {harness::Requirement::seeds});
    const auto seeds = cfg.all_seeds();
    struct Row {
        flow::Trajectory traj;
        flow::Trapping fwd = flow::Trapping::undetermined, bwd = flow::Trapping::undetermined;
        std::string failure;
    };
    std::vector<Row> rows(seeds.size());
    harness::parallel_for(seeds.size(), cfg.threads, [&](std::size_t i) {
        try {
            rows[i].traj = flow::integrate_hamilton(cfg.field, seeds[i], cfg.direction_sign() * cfg.flow_t_end, cfg.flow_tol);
            rows[i].fwd = flow::classify_nontrapping(cfg.field, seeds[i], flow::Direction::forward, cfg.classify);
            rows[i].bwd = flow::classify_nontrapping(cfg.field, seeds[i], flow::Direction::backward, cfg.classify);
        } catch (const std::exception& e) {
            rows[i].failure = e.what();
        }
    });
    auto traj = open_out(c.dir, "trajectories.csv");
    bool header = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].traj.states.empty()) continue;
        std::ostringstream one;
        flow::write_trajectory_csv(one, rows[i].traj, "seed" + std::to_string(i));
        std::string text = one.str();
        if (!header) text.erase(0, text.find('\n') + 1);
        header = false;
        traj << text;
    }
    auto csv = open_out(c.dir, "flow.csv");
    csv << "seed_index,x0,xi0,forward,backward,t_end,max_energy_drift,energy_tol,ok,failure\n";
    json arr = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string failure = r.failure.empty() ? r.traj.failure : r.failure;
        std::replace(failure.begin(), failure.end(), ',', ';');
        const bool ok = r.failure.empty() && r.traj.ok;
        worst = std::max(worst, r.traj.max_drift);
        csv << i << ',' << vec_text(seeds[i].x) << ',' << vec_text(seeds[i].xi) << ',' << flow::to_string(r.fwd) << ','
            << flow::to_string(r.bwd) << ',' << num(cfg.direction_sign() * cfg.flow_t_end) << ','
            << num(r.traj.max_drift) << ',' << num(r.traj.energy_tol) << ',' << (ok ? "true" : "false") << ','
            << failure << '\n';
        arr.push_back({{"x0", rjson(seeds[i].x)}, {"xi0", rjson(seeds[i].xi)}, {"forward", flow::to_string(r.fwd)},
                       {"backward", flow::to_string(r.bwd)}, {"max_energy_drift", r.traj.max_drift},
                       {"energy_tol", r.traj.energy_tol}, {"ok", ok}, {"failure", failure}});
    }
    write_json(c.dir, {{"field", cfg.field_echo}, {"tol", cfg.flow_tol}, {"t_end", cfg.flow_t_end},
                       {"classify", {{"horizon", cfg.classify.horizon}, {"escape_radius", cfg.classify.escape_radius}}},
                       {"seeds", arr}, {"max_energy_drift", worst}});
    c.log << "flow: " << seeds.size() << " trajectories, max energy drift " << num(worst) << '\n';
    return kOk;
}

int wave_operator_cmd(Context& c) {
    const auto& cfg = c.cfg;
    harness::require(cfg, {harness::Requirement::seeds});
    const auto seeds = cfg.all_seeds();
    const std::vector<flow::Direction> dirs{flow::Direction::forward, flow::Direction::backward};
    std::vector<flow::WaveOperatorResult> res(seeds.size() * 2);
    harness::parallel_for(res.size(), cfg.threads, [&](std::size_t k) {
        try {
            res[k] = flow::wave_operator(cfg.field, seeds[k / 2], dirs[k % 2], cfg.wave_tol, cfg.wave);
        } catch (const std::exception& e) {
            res[k].direction = dirs[k % 2];
            res[k].failure = e.what();
        }
    });
    auto csv = open_out(c.dir, "wave_operators.csv");
    csv << "seed_index,direction,x0,xi0,x_plus,xi_plus,residual,horizon,converged,failure\n";
    json arr = json::array();
    int failed = 0;
    for (std::size_t k = 0; k < res.size(); ++k) {
        const auto& w = res[k];
        const auto& s = seeds[k / 2];
        std::string failure = w.failure;
        std::replace(failure.begin(), failure.end(), ',', ';');
        failed += !w.converged;
        csv << k / 2 << ',' << flow::to_string(dirs[k % 2]) << ',' << vec_text(s.x) << ',' << vec_text(s.xi) << ','
            << vec_text(w.x_plus) << ',' << vec_text(w.xi_plus) << ',' << num(w.residual) << ',' << num(w.horizon)
            << ',' << (w.converged ? "true" : "false") << ',' << failure << '\n';
        json raw = json::array();
        for (const auto& r : w.raw_estimates) raw.push_back(rjson(r));
        arr.push_back({{"x0", rjson(s.x)}, {"xi0", rjson(s.xi)}, {"direction", flow::to_string(dirs[k % 2])},
                       {"x_plus", rjson(w.x_plus)}, {"xi_plus", rjson(w.xi_plus)}, {"residual", w.residual},
                       {"horizon", w.horizon}, {"horizons", w.horizons}, {"raw_estimates", raw},
                       {"converged", w.converged}, {"failure", w.failure}});
    }
    write_json(c.dir, {{"field", cfg.field_echo}, {"tol", cfg.wave_tol}, {"results", arr}, {"unconverged", failed}});
    c.log << "wave-operator: " << res.size() - failed << " of " << res.size() << " limits converged\n";
    return kOk;
}

int wavefront_cmd(Context& c) {
    const auto& cfg = c.cfg;
    harness::require(cfg, {harness::Requirement::seeds, harness::Requirement::data});
    const auto seeds = cfg.all_seeds();
    std::vector<fbi::FbiPoint> points;
    for (const auto& s : seeds) points.push_back({s.x, s.xi});
    auto csv = open_out(c.dir, "wavefront.csv");
    csv << "data,x0,xi0,delta_hat,r2,verdict,flag\n";
    json reports = json::array();
    std::map<std::string, int> counts;
    for (const auto& d : cfg.data) {
        const auto U = harness::make_initial_data(d, cfg.field.n, cfg.grid.L, cfg.grid.N * cfg.grid.refine);
        fbi::WavefrontReport rep;
        rep.entries.resize(points.size());
        harness::parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
            rep.entries[i].seed = points[i];
            try {
                rep.entries[i].estimate =
                    fbi::decay_rate_estimate(U, points[i], cfg.h_grid, cfg.omega_radius, cfg.thresholds);
            } catch (const std::exception& e) {
                rep.entries[i].error = e.what();
            }
        });
        for (const auto& e : rep.entries) {
            ++counts[fbi::to_string(e.verdict())];
            std::string flag = e.estimate ? e.estimate->flag : "error: " + e.error;
            std::replace(flag.begin(), flag.end(), ',', ';');
            csv << d.label() << ',' << vec_text(e.seed.x0) << ',' << vec_text(e.seed.xi0) << ',';
            if (e.estimate) csv << num(e.estimate->delta_hat) << ',' << num(e.estimate->r2);
            else csv << ',';
            csv << ',' << fbi::to_string(e.verdict()) << ',' << flag << '\n';
        }
        auto j = fbi::to_json(rep);
        j["data"] = d.label();
        reports.push_back(j);
    }
    write_json(c.dir, {{"config", harness::to_json(cfg)}, {"counts", counts}, {"reports", reports}});
    c.log << "wavefront:";
    for (const auto& [k, v] : counts) c.log << ' ' << k << '=' << v;
    c.log << '\n';
    return kOk;
}

int propagate_cmd(Context& c) {
    const auto& cfg = c.cfg;
    harness::require(cfg, {harness::Requirement::data});
    const int n = cfg.field.n;
    const schrod::DiscreteHamiltonian H(cfg.field, n, cfg.grid.L, cfg.grid.N);
    std::vector<double> times = cfg.times;
    std::sort(times.begin(), times.end());
    if (cfg.snapshots) fs::create_directories(fs::path(c.dir) / "snapshots");
    auto csv = open_out(c.dir, "evolution.csv");
    csv << "data,t,state,norm_drift,boundary_mass,steps,matvecs,ok\n";
    json arr = json::array();
    bool all_ok = true;
    for (const auto& d : cfg.data) {
        const std::string label = d.label();
        const auto u0 = harness::make_initial_data(d, n, cfg.grid.L, cfg.grid.N);
        GridFunction state = u0;
        double t_prev = 0.0;
        long steps = 0, matvecs = 0;
        for (double t : times) {
            const double ts = cfg.direction_sign() * t;
            auto r = schrod::propagate(H, state, cfg.direction_sign() * (t - t_prev), cfg.krylov_tol, cfg.krylov);
            steps += r.steps;
            matvecs += r.matvecs;
            t_prev = t;
            state = r.u_t;
            all_ok = all_ok && r.ok;
            const double n0 = u0.l2_norm();
            const double drift = n0 > 0 ? std::abs(state.l2_norm() - n0) / n0 : 0.0;
            const GridFunction conj = schrod::free_propagate(state, -ts).u_t;
            const double bm = std::max(r.boundary_mass, schrod::boundary_mass(state));
            csv << label << ',' << num(ts) << ",H," << num(drift) << ',' << num(bm) << ',' << steps << ',' << matvecs
                << ',' << (r.ok ? "true" : "false") << '\n';
            csv << label << ',' << num(ts) << ",conjugated," << num(n0 > 0 ? std::abs(conj.l2_norm() - n0) / n0 : 0.0)
                << ',' << num(schrod::boundary_mass(conj)) << ",0,0,true\n";
            const std::string stem = label + "_t" + num(t);
            auto slice = open_out(c.dir, "slice_" + stem + ".csv");
            schrod::write_slice_csv(slice, state);
            if (cfg.snapshots) {
                schrod::write_binary_file((fs::path(c.dir) / "snapshots" / (stem + "_H.bin")).string(), state);
                schrod::write_binary_file((fs::path(c.dir) / "snapshots" / (stem + "_conjugated.bin")).string(), conj);
            }
            arr.push_back({{"data", label}, {"t", ts}, {"norm_drift", drift}, {"boundary_mass", bm}, {"steps", steps},
                           {"matvecs", matvecs}, {"ok", r.ok}, {"failure", r.failure}});
            if (bm > schrod::kBoundaryWarn)
                c.log << "warning: boundary mass " << num(bm) << " for '" << label << "' at t = " << num(ts) << '\n';
        }
    }
    write_json(c.dir, {{"config", harness::to_json(cfg)}, {"evolutions", arr}});
    c.log << "propagate: " << arr.size() << " states written\n";
    return all_ok ? kOk : kHardError;
}

int egorov_cmd(Context& c) {
    const auto& cfg = c.cfg;
    harness::require(cfg, {harness::Requirement::seeds});
    if (cfg.field.n != 1) throw harness::ConfigError("config violation in " + cfg.source + ": egorov-check needs n = 1");
    coeffs::Evaluator f;
    try {
        f = coeffs::parse_expression(cfg.egorov.f, 1);
    } catch (const coeffs::ParseError& e) {
        throw harness::ConfigError("config violation in " + cfg.source + ": cannot parse egorov.f: " + e.what());
    }
    auto fr = [&](const RVec& x) { return f(complexify(x)); };
    const auto seeds = cfg.all_seeds();
    std::vector<microlocal::EgorovReport> reps(seeds.size() * cfg.egorov.times.size());
    harness::parallel_for(reps.size(), cfg.threads, [&](std::size_t k) {
        const auto& s = seeds[k / cfg.egorov.times.size()];
        const double t = cfg.egorov.times[k % cfg.egorov.times.size()];
        reps[k] = microlocal::symbol_action_check(fr, s, t, cfg.egorov.h_grid, cfg.egorov.L, cfg.egorov.N);
    });
    auto csv = open_out(c.dir, "egorov.csv");
    csv << "x0,xi0,t,h,ratio_re,ratio_im,target_re,target_im,error,order,slope\n";
    json arr = json::array();
    bool ok = true;
    for (const auto& r : reps) {
        for (const auto& row : r.rows)
            csv << vec_text(r.point.x) << ',' << vec_text(r.point.xi) << ',' << num(r.t) << ',' << num(row.h) << ','
                << num(row.ratio.real()) << ',' << num(row.ratio.imag()) << ',' << num(r.target.real()) << ','
                << num(r.target.imag()) << ',' << num(row.error) << ',' << num(r.order) << ',' << num(r.slope) << '\n';
        arr.push_back(microlocal::to_json(r));
        const bool pass = r.exact || r.order >= cfg.egorov.min_order;
        ok = ok && pass;
        c.log << "egorov-check: (" << vec_text(r.point.x) << ", " << vec_text(r.point.xi) << ") t = " << num(r.t)
              << (r.exact ? " exact" : " order " + num(r.order) + " (plain slope " + num(r.slope) + ")") << '\n';
    }
    write_json(c.dir, {{"f", cfg.egorov.f}, {"h_grid", cfg.egorov.h_grid}, {"L", cfg.egorov.L}, {"N", cfg.egorov.N},
                       {"min_order", cfg.egorov.min_order}, {"reports", arr}, {"passed", ok}});
    return ok ? kOk : kCheckFailed;
}

int saddle_cmd(Context& c) {
    const auto& cfg = c.cfg;
    const auto& sp = cfg.saddle;
    if (sp.z.empty()) throw harness::ConfigError("config violation in " + cfg.source + ": invariant 'saddle.z non-empty' violated");
    std::vector<microlocal::SaddleReport> reps(sp.z.size() * sp.s.size());
    harness::parallel_for(reps.size(), cfg.threads, [&](std::size_t k) {
        reps[k] = microlocal::saddle_check(cfg.field, sp.s[k % sp.s.size()], sp.z[k / sp.s.size()], sp.tol);
    });
    auto csv = open_out(c.dir, "saddle.csv");
    csv << "s,z,y_crit,eta_crit,gradient_norm,critical_value,value_gap,sigma_min,crit_distance,converged\n";
    json arr = json::array();
    bool ok = true;
    for (std::size_t zi = 0; zi < sp.z.size(); ++zi) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t si = 0; si < sp.s.size(); ++si) {
            const auto& r = reps[zi * sp.s.size() + si];
            csv << num(r.s) << ',' << cvec_text(r.z) << ',' << cvec_text(r.y_crit) << ',' << cvec_text(r.eta_crit) << ','
                << num(r.gradient_norm) << ',' << num(r.critical_value) << ',' << num(r.value_gap) << ','
                << num(r.sigma_min) << ',' << num(r.crit_distance) << ',' << (r.converged ? "true" : "false") << '\n';
            arr.push_back(microlocal::to_json(r));
            lo = std::min(lo, r.critical_value);
            hi = std::max(hi, r.critical_value);
            const bool pass = r.converged && r.gradient_norm < sp.gradient_tol && r.value_gap < sp.gap_tol &&
                              r.sigma_min >= sp.sigma_floor;
            ok = ok && pass;
            c.log << "saddle-check: z = " << cvec_text(r.z) << " s = " << num(r.s) << " gradient "
                  << num(r.gradient_norm) << " gap " << num(r.value_gap) << " sigma_min " << num(r.sigma_min)
                  << (pass ? "" : "  FAIL " + r.failure) << '\n';
        }
        if (hi - lo >= sp.gap_tol) {
            ok = false;
            c.log << "saddle-check: critical value varies with s by " << num(hi - lo) << '\n';
        }
    }
    write_json(c.dir, {{"field", cfg.field_echo}, {"reports", arr}, {"gradient_tol", sp.gradient_tol},
                       {"gap_tol", sp.gap_tol}, {"sigma_floor", sp.sigma_floor}, {"passed", ok}});
    return ok ? kOk : kCheckFailed;
}

int contour_cmd(Context& c) {
    const auto& cfg = c.cfg;
    const auto& sp = cfg.contour;
    if (sp.z.empty()) throw harness::ConfigError("config violation in " + cfg.source + ": invariant 'contour.z non-empty' violated");
    auto csv = open_out(c.dir, "contour.csv");
    csv << "z,R,samples,max_residual,best_constant,max_x_ratio,bound_holds\n";
    auto pts = open_out(c.dir, "contour_samples.csv");
    pts << "z_index,y,x\n";
    json arr = json::array();
    bool ok = true;
    for (std::size_t k = 0; k < sp.z.size(); ++k) {
        const auto ys = microlocal::contour_samples(sp.z[k], sp.radius, sp.samples, cfg.seed + k);
        for (const auto& y : ys)
            pts << k << ',' << cvec_text(y) << ',' << cvec_text(microlocal::contour_point(sp.z[k], y, sp.R)) << '\n';
        const auto r = microlocal::contour_diagnostics(sp.z[k], ys, sp.R);
        csv << cvec_text(r.z) << ',' << num(r.R) << ',' << r.samples << ',' << num(r.max_residual) << ','
            << num(r.best_constant) << ',' << num(r.max_x_ratio) << ',' << (r.bound_holds ? "true" : "false") << '\n';
        arr.push_back(microlocal::to_json(r));
        const bool pass = r.max_residual < sp.residual_tol && r.bound_holds;
        ok = ok && pass;
        c.log << "contour-check: z = " << cvec_text(r.z) << " max residual " << num(r.max_residual) << " C "
              << num(r.best_constant) << (pass ? "" : "  FAIL") << '\n';
    }
    write_json(c.dir, {{"seed", cfg.seed}, {"radius", sp.radius}, {"residual_tol", sp.residual_tol}, {"reports", arr},
                       {"passed", ok}});
    return ok ? kOk : kCheckFailed;
}

int verify(Context& c, bool flat) {
    harness::RunSink sink(c.dir, c.cfg);
    const auto v = flat ? harness::run_flat_experiment(c.cfg, &sink) : harness::run_theorem_experiment(c.cfg, &sink);
    harness::write_outputs(v, c.cfg, c.dir, true);
    const auto& s = v.summary;
    for (const auto& w : v.warnings) c.log << "warning: " << w << '\n';
    c.log << (flat ? "verify-flat" : "verify-theorem") << ": " << s.agree << " agree, " << s.disagree << " disagree, "
          << s.undetermined << " undetermined, " << s.skipped << " skipped; agreement " << num(s.agreement_rate)
          << ", undetermined fraction " << num(s.undetermined_fraction) << (s.passed ? " -> passed" : " -> FAILED")
          << '\n';
    return s.passed ? kOk : kCheckFailed;
}

const std::map<std::string, std::pair<std::string, std::function<int(Context&)>>>& table() {
    static const std::map<std::string, std::pair<std::string, std::function<int(Context&)>>> t{
        {"validate-metric", {"check short-range decay and ellipticity of the coefficients on sampled points", validate_metric}},
        {"flow", {"integrate Hamilton trajectories and classify trapping", flow_cmd}},
        {"wave-operator", {"forward and backward asymptotic data of each seed", wave_operator_cmd}},
        {"wavefront", {"FBI decay-rate verdicts of the initial data at each seed", wavefront_cmd}},
        {"propagate", {"evolve the initial data and write snapshots", propagate_cmd}},
        {"egorov-check", {"order of the symbol-action error for coherent states", egorov_cmd}},
        {"saddle-check", {"critical-point diagnostics of the generating function", saddle_cmd}},
        {"contour-check", {"good-contour identity on random samples", contour_cmd}},
        {"verify-theorem", {"wavefront propagation through the wave operator", [](Context& c) { return verify(c, false); }}},
        {"verify-flat", {"flat-metric comparison of e^{-itH}u0 and e^{-itH0}u0", [](Context& c) { return verify(c, true); }}},
    };
    return t;
}

}  // namespace

const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"validate-metric", "flow",         "wave-operator", "wavefront",
                                            "propagate",       "egorov-check", "saddle-check",  "contour-check",
                                            "verify-theorem",  "verify-flat"};
    return n;
}

std::string description(const std::string& name) {
    auto it = table().find(name);
    return it == table().end() ? std::string() : it->second.first;
}

int run(const std::string& name, ExperimentConfig cfg, const Options& opt, std::ostream& log) {
    auto it = table().find(name);
    if (it == table().end()) {
        log << "unknown subcommand '" << name << "'\n";
        return kUsage;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.threads) cfg.threads = *opt.threads;
    try {
        Context c{cfg, harness::resolve_output_dir(cfg, opt.output_dir), log};
        fs::create_directories(c.dir);
        const auto start = std::chrono::steady_clock::now();
        const int status = it->second.second(c);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log << name << ": outputs in " << c.dir << " (" << num(std::round(secs * 10) / 10) << " s)\n";
        return status;
    } catch (const harness::ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kHardError;
    } catch (const std::exception& e) {
        log << "error: " << name << " failed: " << e.what() << '\n';
        return kHardError;
    }
}

int run(const std::string& name, const std::string& config_path, const Options& opt, std::ostream& log) {
    if (table().find(name) == table().end()) {
        log << "unknown subcommand '" << name << "'\n";
        return kUsage;
    }
    try {
        return run(name, harness::load_config(config_path), opt, log);
    } catch (const harness::ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kHardError;
    }
}

}  // namespace wavefront::commands
