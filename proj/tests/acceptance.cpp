// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// usage: acceptance [output-root]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wavefront/commands.hpp"
#include "wavefront/fbi.hpp"
#include "wavefront/flow.hpp"
#include "wavefront/harness.hpp"
#include "wavefront/microlocal.hpp"
#include "wavefront/schrod.hpp"

using namespace wavefront;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }

RVec r1(double v) { return RVec::Constant(1, v); }
CVec c1(cplx v) { return CVec::Constant(1, v); }

GridFunction gaussian(double L, int N, double c = 0.0) {
    return GridFunction::sample(1, L, N, [=](const RVec& x) { return cplx(std::exp(-0.5 * (x[0] - c) * (x[0] - c))); });
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

Outcome fbi_closed_form() {
    const auto g = gaussian(16.0, 8192);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> re(-1.5, 1.5), im(-0.8, 0.8), hh(0.025, 0.2);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const cplx z(re(rng), im(rng));
        const double h = hh(rng);
        const cplx ref = oracle::gaussian_fbi(z, h);
        worst = std::max(worst, std::abs(fbi::fbi_transform(g, c1(z), h) - ref) / std::abs(ref));
    }
    return {worst < 1e-7, "max relative error " + sci(worst) + " over 20 (z, h)"};
}

Outcome decay_calibration() {
    const auto hs = fbi::default_h_grid();
    const fbi::FbiPoint p{r1(0), r1(1)};
    const auto eg = fbi::decay_rate_estimate(gaussian(16.0, 8192), p, hs);
    harness::DataSpec jd;
    jd.kind = "jump";
    const auto ej = fbi::decay_rate_estimate(harness::make_initial_data(jd, 1, 16.0, 8192), p, hs);
    const bool ok = std::abs(eg.delta_hat - 0.5) <= 0.02 && eg.r2 >= 0.999 && std::abs(ej.delta_hat) < 0.01;
    return {ok, "gaussian delta " + fmt("%.4f", eg.delta_hat) + " r2 " + fmt("%.6f", eg.r2) + "; jump delta " +
                    fmt("%.4f", ej.delta_hat)};
}

Outcome propagator() {
    const double L = 20 * oracle::pi;
    const int N = 4096;
    const auto r = schrod::free_propagate(gaussian(L, N), 1.0);
    double err = 0.0;
    for (int i = 0; i < N; ++i) err = std::max(err, std::abs(r.u_t.values[i] - oracle::free_gaussian(r.u_t.coord(i), 1.0)));

    const auto u0 = gaussian(L, N, -1.0);
    const schrod::DiscreteHamiltonian H(coeffs::conformal1d(), 1, L, N);
    const auto var = schrod::propagate(H, u0, 1.0, 1e-10);
    const schrod::DiscreteHamiltonian H0(coeffs::flat(), 1, L, N);
    const auto flat = schrod::propagate(H0, u0, 1.0, 1e-10);
    const double red = max_diff(flat.u_t, schrod::free_propagate(u0, 1.0).u_t);
    const bool ok = err < 1e-8 && var.ok && var.norm_drift < 1e-8 && flat.ok && red < 1e-8;
    return {ok, "free error " + sci(err) + ", norm drift " + sci(var.norm_drift) + ", flat reduction " + sci(red)};
}

Outcome flow_and_wave() {
    const auto field = coeffs::conformal1d();
    double drift = 0.0;
    bool ok = true;
    for (double t : {-50.0, 50.0})
        for (double xi : {0.5, 1.0, 2.0}) {
            const auto tr = flow::integrate_hamilton(field, {r1(0.3), r1(xi)}, t, 1e-10);
            ok = ok && tr.ok;
            drift = std::max(drift, tr.max_drift);
        }
    const auto w = flow::wave_operator(field, {r1(0), r1(1)}, flow::Direction::forward, 1e-8);
    const double xi_err = std::abs(w.xi_plus[0] - std::sqrt(2.0));
    const double x_err = std::abs(w.x_plus[0] - oracle::conformal_x_plus());
    ok = ok && drift < 1e-10 && w.converged && xi_err < 1e-8 && w.residual < 1e-6 && x_err < 1e-6;
    return {ok, "energy drift " + sci(drift) + ", xi+ error " + sci(xi_err) + ", x+ Cauchy residual " +
                    sci(w.residual) + " (error vs quadrature " + sci(x_err) + ")"};
}

Outcome saddle() {
    const auto field = coeffs::conformal1d();
    const CVec z = c1(cplx(0, -1));
    double grad = 0.0, gap = 0.0, sigma = 1e300, lo = 1e300, hi = -1e300;
    bool ok = true;
    for (double s : {0.5, 1.0, 2.0}) {
        const auto r = microlocal::saddle_check(field, s, z, 1e-10);
        ok = ok && r.converged;
        grad = std::max(grad, r.gradient_norm);
        gap = std::max(gap, r.value_gap);
        sigma = std::min(sigma, r.sigma_min);
        lo = std::min(lo, r.critical_value);
        hi = std::max(hi, r.critical_value);
    }
    ok = ok && grad < 1e-6 && gap < 1e-6 && hi - lo < 1e-6 && sigma >= 0.1;
    return {ok, "gradient " + sci(grad) + ", gap " + sci(gap) + ", s-spread " + sci(hi - lo) + ", sigma_min " +
                    fmt("%.4f", sigma)};
}

Outcome egorov() {
    auto f = [](const RVec& x) { return cplx(1.0 / (1.0 + x[0] * x[0])); };
    const flow::PhasePoint p{r1(0), r1(1)};
    std::string detail;
    bool ok = true;
    for (double t : {0.0, 1.0, 2.0}) {
        const auto r = microlocal::symbol_action_check(f, p, t, {0.1, 0.05, 0.025});
        ok = ok && (r.exact || r.order >= 0.9);
        detail += (detail.empty() ? "" : "; ") + fmt("t=%g", t) + " order " + fmt("%.3f", r.order) + " slope " +
                  fmt("%.3f", r.slope);
    }
    return {ok, detail};
}

Outcome contour() {
    const CVec z = c1(cplx(0.2, -0.5));
    const auto r = microlocal::contour_diagnostics(z, microlocal::contour_samples(z, 0.5, 100, 11), 2.0);
    return {r.samples == 100 && r.max_residual < 1e-12, "max residual " + sci(r.max_residual) + " on 100 samples"};
}

struct Suite {
    harness::TheoremVerdict verdict;
    harness::ExperimentConfig cfg;
};

Suite run_suite(const std::string& config, const std::string& dir, bool flat) {
    Suite s{{}, harness::load_config(config)};
    fs::remove_all(dir);
    harness::RunSink sink(dir, s.cfg);
    s.verdict = flat ? harness::run_flat_experiment(s.cfg, &sink) : harness::run_theorem_experiment(s.cfg, &sink);
    harness::write_outputs(s.verdict, s.cfg, dir, true);
    return s;
}

int distinct_seeds(const harness::TheoremVerdict& v, const std::string& role_prefix) {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& r : v.records)
        if (r.role.rfind(role_prefix, 0) == 0) seen.insert({r.role, r.seed_index});
    return static_cast<int>(seen.size());
}

std::string summary_text(const harness::Summary& s) {
    return std::to_string(s.agree) + " agree, " + std::to_string(s.disagree) + " disagree, " +
           std::to_string(s.undetermined) + " undetermined, " + std::to_string(s.skipped) + " skipped; rate " +
           fmt("%.3f", s.agreement_rate) + ", undetermined fraction " + fmt("%.3f", s.undetermined_fraction);
}

Outcome flat_suite(const std::string& config, const std::string& dir) {
    const auto s = run_suite(config, dir, true);
    const int seeds = distinct_seeds(s.verdict, "");
    const auto& m = s.verdict.summary;
    const bool ok = seeds >= 15 && m.agree > 0 && m.disagree == 0 && m.undetermined_fraction <= 0.2;
    return {ok, std::to_string(seeds) + " seeds; " + summary_text(m)};
}

Outcome theorem_suite(const std::string& config, const std::string& dir) {
    const auto s = run_suite(config, dir, false);
    const int images = distinct_seeds(s.verdict, "image");
    const int controls = distinct_seeds(s.verdict, "control");
    std::set<double> ts;
    std::set<std::string> data;
    for (const auto& r : s.verdict.records) {
        ts.insert(r.t);
        data.insert(r.data);
    }
    const auto& m = s.verdict.summary;
    const bool ok = images >= 10 && controls >= 10 && ts.count(0.5) && ts.count(1.0) && data.size() >= 2 &&
                    m.agree > 0 && m.agreement_rate >= 0.95 && m.undetermined_fraction <= 0.2;
    return {ok, std::to_string(images) + " image and " + std::to_string(controls) + " control seeds; " + summary_text(m)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every CSV under a must exist under b with the same bytes.
int compare_csvs(const fs::path& a, const fs::path& b, int& files) {
    int diffs = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        ++files;
        const auto other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++diffs;
    }
    return diffs;
}

Outcome determinism(const std::string& src, const std::string& root, const std::string& flat_dir) {
    std::ostringstream log;
    int files = 0, diffs = 0;
    for (const auto& [name, cfg] : {std::pair{"contour-check", "microlocal.cfg"}, {"validate-metric", "conformal1d.cfg"}}) {
        for (const char* rep : {"a", "b"}) {
            commands::Options opt;
            opt.seed = 12345;
            opt.output_dir = root + "/det-" + name + "-" + rep;
            fs::remove_all(*opt.output_dir);
            if (commands::run(name, src + "/configs/" + cfg, opt, log) != commands::kOk) ++diffs;
        }
        diffs += compare_csvs(root + "/det-" + name + "-a", root + "/det-" + name + "-b", files);
    }
    run_suite(src + "/configs/potential-only.cfg", root + "/det-flat-b", true);
    diffs += compare_csvs(flat_dir, root + "/det-flat-b", files);
    return {diffs == 0 && files > 0, std::to_string(files) + " CSV files compared, " + std::to_string(diffs) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string src = WAVEFRONT_SOURCE_DIR;
    const std::string root = argc > 1 ? argv[1] : "acceptance_out";
    fs::create_directories(root);
    const std::string flat_dir = root + "/flat";

    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "FBI Gaussian closed form", 1, fbi_closed_form},
        {2, "decay-rate calibration", 10, decay_calibration},
        {3, "propagator correctness", 30, propagator},
        {4, "flow and wave operators", 5, flow_and_wave},
        {5, "saddle structure", 60, saddle},
        {6, "symbol action order", 60, egorov},
        {7, "contour identity", 1, contour},
        {8, "flat-case suite", 600, [&] { return flat_suite(src + "/configs/potential-only.cfg", flat_dir); }},
        {9, "theorem suite", 1200,
         [&] { return theorem_suite(src + "/configs/conformal1d.cfg", root + "/conformal1d"); }},
        {10, "determinism", 1200, [&] { return determinism(src, root, flat_dir); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = sec <= c.budget;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::cout << "criterion " << c.id << ' ' << (pass ? "PASS" : "FAIL") << "  " << c.name << ": " << o.detail
                  << "  [" << fmt("%.1f", sec) << " s" << (in_time ? "" : ", over budget") << "]" << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
