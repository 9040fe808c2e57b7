#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "wavefront/harness.hpp"
#include "wavefront/io_util.hpp"

namespace wavefront::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Initial data

std::string DataSpec::label() const {
    if (!name.empty()) return name;
    std::string s = kind;
    if (x0 != 0.0) s += "@" + num(x0);
    if (width != 1.0) s += "-w" + num(width);
    if (omega != 0.0) s += "-mod" + num(omega);
    if (refocus != 0.0) s += "-refocus" + num(refocus);
    return s;
}

GridFunction make_initial_data(const DataSpec& d, int n, double L, int N) {
    const double w2 = d.width * d.width;
    auto u = GridFunction::sample(n, L, N, [&](const RVec& x) {
        RVec y = x;
        y[0] -= d.x0;
        const double g = std::exp(-0.5 * y.squaredNorm() / w2);
        double v = g;
        if (d.kind == "jump") {
            v = y[0] > 0 ? g : (y[0] == 0 ? 0.5 * g : 0.0);
        } else if (d.kind == "flat") {
            v = y[0] > 0 ? std::exp(-1.0 / y[0]) * g : 0.0;
        }
        return d.omega != 0.0 ? v * std::exp(I * (d.omega * x[0])) : cplx(v);
    });
    if (d.refocus != 0.0) u = schrod::free_propagate(u, -d.refocus).u_t;
    return u;
}

// ---------------------------------------------------------------------------
// Ordered writer and sink

void OrderedWriter::submit(std::size_t index, std::string chunk) {
    std::lock_guard lock(mutex_);
    pending_.emplace(index, std::move(chunk));
    while (!pending_.empty() && pending_.begin()->first == next_) {
        os_ << pending_.begin()->second;
        pending_.erase(pending_.begin());
        ++next_;
    }
    os_.flush();
}

namespace {

std::string csv_text(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

void header_vec(std::ostream& os, const char* name, int n) {
    if (n == 1) {
        os << name;
        return;
    }
    for (int j = 1; j <= n; ++j) os << (j > 1 ? "," : "") << name << '_' << j;
}

void values_vec(std::ostream& os, const RVec& v, int n) {
    for (int j = 0; j < n; ++j) os << (j > 0 ? "," : "") << (j < v.size() ? num(v[j]) : std::string());
}

std::string joined(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
    return s;
}

std::string file_safe(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return out;
}

nlohmann::json vec_json(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string to_string(Agreement a) {
    switch (a) {
        case Agreement::agree: return "agree";
        case Agreement::disagree: return "disagree";
        case Agreement::undetermined: return "undetermined";
        case Agreement::skipped: return "skipped";
    }
    return "?";
}

std::string verdicts_header(int n) {
    std::ostringstream os;
    os << "record,data,t,role,seed_index,";
    header_vec(os, "x0", n);
    os << ',';
    header_vec(os, "xi0", n);
    os << ",trapping,";
    header_vec(os, "x_plus", n);
    os << ',';
    header_vec(os, "xi_plus", n);
    os << ",wave_converged,wave_residual,wave_horizon"
          ",verdict_before,delta_before,r2_before,flag_before"
          ",verdict_after,delta_after,r2_after,flag_after,agreement,note"
          ",field,L,N,refine,h_grid,omega_radius,delta_reg,delta_sing,r2_min,noise_rel,band_sigmas"
          ",flow_tol,classify_horizon,escape_radius,wave_tol,krylov_tol,time_reversal\n";
    return os.str();
}

std::string verdict_row(const SeedRecord& r, const ExperimentConfig& cfg) {
    const int n = cfg.field.n;
    std::ostringstream os;
    os << csv_text(r.data) << ',' << num(r.t) << ',' << r.role << ',' << r.seed_index << ',';
    values_vec(os, r.seed.x, n);
    os << ',';
    values_vec(os, r.seed.xi, n);
    os << ',' << flow::to_string(r.trapping) << ',';
    values_vec(os, r.image.x, n);
    os << ',';
    values_vec(os, r.image.xi, n);
    os << ',' << (r.wave_converged ? "true" : "false") << ',' << num(r.wave_residual) << ',' << num(r.wave_horizon);
    for (const auto* e : {&r.before, &r.after}) {
        if (*e)
            os << ',' << fbi::to_string((*e)->verdict) << ',' << num((*e)->delta_hat) << ',' << num((*e)->r2) << ','
               << csv_text((*e)->flag);
        else
            os << ",undetermined,,,";
    }
    os << ',' << to_string(r.agreement) << ',' << csv_text(r.note);
    os << ',' << csv_text(cfg.field_name) << ',' << num(cfg.grid.L) << ',' << cfg.grid.N << ',' << cfg.grid.refine << ','
       << joined(cfg.h_grid) << ',' << num(cfg.omega_radius) << ',' << num(cfg.thresholds.delta_reg) << ','
       << num(cfg.thresholds.delta_sing) << ',' << num(cfg.thresholds.r2_min) << ',' << num(cfg.thresholds.noise_rel) << ',' << num(cfg.thresholds.band_sigmas)
       << ',' << num(cfg.flow_tol) << ',' << num(cfg.classify.horizon) << ',' << num(cfg.classify.escape_radius) << ','
       << num(cfg.wave_tol) << ',' << num(cfg.krylov_tol) << ',' << (cfg.time_reversal ? "true" : "false") << '\n';
    return os.str();
}

std::string decay_scans_header(int n) {
    std::ostringstream os;
    os << "record,data,t,role,side,";
    header_vec(os, "x0", n);
    os << ',';
    header_vec(os, "xi0", n);
    os << ",h,omega_radius,log_norm,log_floor,censored\n";
    return os.str();
}

std::string decay_scan_rows(const SeedRecord& r, std::size_t record_index) {
    std::ostringstream os;
    for (const auto& [side, est] : {std::pair{"before", &r.before}, std::pair{"after", &r.after}}) {
        if (!*est) continue;
        const auto& e = **est;
        const int n = static_cast<int>(e.point.x0.size());
        const double hmax = e.h_values.empty() ? 1.0 : *std::max_element(e.h_values.begin(), e.h_values.end());
        for (std::size_t i = 0; i < e.h_values.size(); ++i) {
            os << record_index << ',' << csv_text(r.data) << ',' << num(r.t) << ',' << r.role << ',' << side << ',';
            values_vec(os, e.point.x0, n);
            os << ',';
            values_vec(os, e.point.xi0, n);
            os << ',' << num(e.h_values[i]) << ',' << num(e.omega_radius * e.h_values[i] / hmax) << ','
               << num(e.log_norms[i]) << ',' << num(e.log_floors[i]) << ',' << (e.censored[i] ? "true" : "false")
               << '\n';
        }
    }
    return os.str();
}

RunSink::RunSink(const std::string& dir, const ExperimentConfig& cfg)
    : dir_(dir), cfg_(cfg), verdicts_(verdicts_file_, 0), scans_(scans_file_, 0) {
    fs::create_directories(dir_);
    verdicts_file_.open(fs::path(dir_) / "verdicts.csv", std::ios::binary);
    scans_file_.open(fs::path(dir_) / "decay_scans.csv", std::ios::binary);
    if (!verdicts_file_ || !scans_file_) throw std::runtime_error("cannot write into output directory " + dir_);
    verdicts_file_ << verdicts_header(cfg.field.n);
    scans_file_ << decay_scans_header(cfg.field.n);
    if (cfg_.snapshots) fs::create_directories(fs::path(dir_) / "snapshots");
}

void RunSink::record(std::size_t index, const SeedRecord& r) {
    verdicts_.submit(index, std::to_string(index) + "," + verdict_row(r, cfg_));
    scans_.submit(index, decay_scan_rows(r, index));
}

void RunSink::snapshot(const std::string& name, const GridFunction& u) {
    if (!cfg_.snapshots) return;
    schrod::write_binary_file((fs::path(dir_) / "snapshots" / (file_safe(name) + ".bin")).string(), u);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

Agreement compare(const SeedRecord& r) {
    if (!r.before || !r.after) return Agreement::undetermined;
    const auto a = r.before->verdict, b = r.after->verdict;
    if (a == fbi::Verdict::undetermined || b == fbi::Verdict::undetermined) return Agreement::undetermined;
    return a == b ? Agreement::agree : Agreement::disagree;
}

/// A phase point pair probed in every (datum, t) pass.
struct Probe {
    std::string role;
    int seed_index = 0;
    flow::PhasePoint pre;
    flow::PhasePoint image;
    flow::Trapping trapping = flow::Trapping::undetermined;
    double wave_residual = 0.0;
    double wave_horizon = 0.0;
    bool wave_converged = false;
    bool skip = false;
    bool usable = true;
    std::string note;
    flow::Trajectory trajectory;
};

std::optional<fbi::DecayEstimate> estimate(const GridFunction& U, const flow::PhasePoint& p, const ExperimentConfig& cfg,
                                           const fbi::Thresholds& th, std::string& note) {
    try {
        return fbi::decay_rate_estimate(U, {p.x, p.xi}, cfg.h_grid, cfg.omega_radius, th);
    } catch (const std::exception& e) {
        note += std::string(note.empty() ? "" : "; ") + "decay fit failed: " + e.what();
        return std::nullopt;
    }
}

flow::Trajectory trajectory_for(const ExperimentConfig& cfg, const flow::PhasePoint& p) {
    try {
        return flow::integrate_hamilton(cfg.field, p, cfg.direction_sign() * cfg.flow_t_end, cfg.flow_tol);
    } catch (const std::exception& e) {
        flow::Trajectory t;
        t.ok = false;
        t.failure = e.what();
        return t;
    }
}

std::vector<Probe> theorem_probes(const ExperimentConfig& cfg, int index, const flow::PhasePoint& seed) {
    const auto dir = cfg.direction();
    std::vector<Probe> out;
    Probe img;
    img.role = "image";
    img.seed_index = index;
    img.pre = seed;
    img.image = seed;
    try {
        img.trapping = flow::classify_nontrapping(cfg.field, seed, dir, cfg.classify);
    } catch (const std::exception& e) {
        img.note = std::string("classification failed: ") + e.what();
    }
    img.trajectory = trajectory_for(cfg, seed);
    if (img.trapping != flow::Trapping::nontrapping) {
        img.skip = true;
        if (img.note.empty()) img.note = "seed is not " + flow::to_string(dir) + " nontrapping";
        out.push_back(std::move(img));
        return out;
    }
    flow::WaveOperatorResult w;
    try {
        w = flow::wave_operator(cfg.field, seed, dir, cfg.wave_tol, cfg.wave);
    } catch (const std::exception& e) {
        w.converged = false;
        w.failure = e.what();
    }
    img.wave_converged = w.converged;
    img.wave_residual = w.residual;
    img.wave_horizon = w.horizon;
    if (!w.converged || w.x_plus.size() == 0) {
        img.usable = false;
        img.note = "wave operator did not converge: " + w.failure;
        out.push_back(std::move(img));
        return out;
    }
    img.image = {w.x_plus, w.xi_plus};
    out.push_back(img);
    if (!cfg.controls) return out;

    for (double sgn : {-1.0, 1.0}) {
        Probe c;
        c.role = sgn < 0 ? "control-" : "control+";
        c.seed_index = index;
        c.image = {w.x_plus, w.xi_plus};
        c.image.x[0] += sgn * cfg.control_offset;
        c.wave_horizon = w.horizon;
        try {
            auto inv = flow::inverse_wave_operator(cfg.field, c.image, dir, cfg.wave_tol, cfg.wave);
            c.pre = inv.point;
            c.wave_converged = inv.converged;
            c.wave_residual = inv.residual;
            if (!inv.converged) {
                c.usable = false;
                c.note = "inverse wave operator did not converge";
            } else {
                c.trapping = flow::classify_nontrapping(cfg.field, c.pre, dir, cfg.classify);
                if (c.trapping != flow::Trapping::nontrapping) {
                    c.skip = true;
                    c.note = "control preimage is not " + flow::to_string(dir) + " nontrapping";
                }
                c.trajectory = trajectory_for(cfg, c.pre);
            }
        } catch (const std::exception& e) {
            c.pre = c.image;
            c.usable = false;
            c.note = std::string("inverse wave operator failed: ") + e.what();
        }
        out.push_back(std::move(c));
    }
    return out;
}

SeedRecord make_record(const Probe& p, const std::string& data, double t) {
    SeedRecord r;
    r.data = data;
    r.t = t;
    r.role = p.role;
    r.seed_index = p.seed_index;
    r.seed = p.pre;
    r.image = p.image;
    r.trapping = p.trapping;
    r.wave_residual = p.wave_residual;
    r.wave_horizon = p.wave_horizon;
    r.wave_converged = p.wave_converged;
    r.note = p.note;
    return r;
}

void finish_record(SeedRecord& r, bool skip) {
    r.agreement = skip ? Agreement::skipped : compare(r);
}

struct Stepper {
    Stepper(const schrod::DiscreteHamiltonian& h, const ExperimentConfig& c, GridFunction u)
        : H(h), cfg(c), state(std::move(u)) {}

    const schrod::DiscreteHamiltonian& H;
    const ExperimentConfig& cfg;
    GridFunction state;
    double t_prev = 0.0;
    long steps = 0, matvecs = 0;
    double boundary = 0.0;
    bool ok = true;
    std::string failure;

    /// e^{-i sign t H} u0, continuing from the previous time.
    void advance(double t) {
        if (!ok) return;
        auto r = schrod::propagate(H, state, cfg.direction_sign() * (t - t_prev), cfg.krylov_tol, cfg.krylov);
        steps += r.steps;
        matvecs += r.matvecs;
        boundary = std::max(boundary, r.boundary_mass);
        ok = r.ok;
        failure = r.failure;
        state = std::move(r.u_t);
        t_prev = t;
    }
};

double relative_drift(const GridFunction& a, const GridFunction& b) {
    const double na = a.l2_norm();
    return na > 0 ? std::abs(b.l2_norm() - na) / na : 0.0;
}

void warn_boundary(TheoremVerdict& v, const EvolutionLog& log) {
    if (log.boundary_mass > schrod::kBoundaryWarn)
        v.warnings.push_back("boundary mass " + num(log.boundary_mass) + " for data '" + log.data + "' (" + log.state +
                             ", t = " + num(log.t) + ") exceeds " + num(schrod::kBoundaryWarn) +
                             "; periodic images are not negligible");
}

}  // namespace

Summary summarize(const std::vector<SeedRecord>& records, double min_agreement, double max_undetermined) {
    Summary s;
    s.records = static_cast<int>(records.size());
    for (const auto& r : records) {
        switch (r.agreement) {
            case Agreement::agree: ++s.agree; break;
            case Agreement::disagree: ++s.disagree; break;
            case Agreement::undetermined: ++s.undetermined; break;
            case Agreement::skipped: ++s.skipped; break;
        }
    }
    const int determined = s.agree + s.disagree;
    const int active = s.records - s.skipped;
    s.agreement_rate = determined > 0 ? static_cast<double>(s.agree) / determined : 0.0;
    s.undetermined_fraction = active > 0 ? static_cast<double>(s.undetermined) / active : 1.0;
    s.passed = determined > 0 && s.agreement_rate >= min_agreement && s.undetermined_fraction <= max_undetermined;
    return s;
}

TheoremVerdict run_theorem_experiment(const ExperimentConfig& cfg, RunSink* sink) {
    require(cfg, {Requirement::seeds, Requirement::data});
    TheoremVerdict v;
    v.experiment = "theorem";
    const auto seeds = cfg.all_seeds();
    const int n = cfg.field.n;

    std::vector<std::vector<Probe>> per_seed(seeds.size());
    parallel_for(seeds.size(), cfg.threads,
                 [&](std::size_t i) { per_seed[i] = theorem_probes(cfg, static_cast<int>(i), seeds[i]); });
    std::vector<Probe> probes;
    for (auto& ps : per_seed)
        for (auto& p : ps) probes.push_back(std::move(p));
    for (const auto& p : probes) {
        v.trajectories.push_back(p.trajectory);
        v.trajectory_labels.push_back("seed" + std::to_string(p.seed_index) + ":" + p.role);
    }

    std::vector<double> times = cfg.times;
    std::sort(times.begin(), times.end());
    const schrod::DiscreteHamiltonian H(cfg.field, n, cfg.grid.L, cfg.grid.N);
    std::size_t index = 0;

    for (const auto& d : cfg.data) {
        const std::string label = d.label();
        const GridFunction u0 = make_initial_data(d, n, cfg.grid.L, cfg.grid.N);
        if (sink) sink->snapshot(label + "_u0", u0);
        std::vector<std::optional<fbi::DecayEstimate>> before(probes.size());
        std::vector<std::string> before_notes(probes.size());
        {
            // The datum has a closed form: sample it on the analysis grid instead of interpolating u0.
            const GridFunction U0 = make_initial_data(d, n, cfg.grid.L, cfg.grid.N * cfg.grid.refine);
            parallel_for(probes.size(), cfg.threads, [&](std::size_t i) {
                if (!probes[i].skip && probes[i].usable)
                    before[i] = estimate(U0, probes[i].pre, cfg, cfg.thresholds, before_notes[i]);
            });
        }

        Stepper stepper{H, cfg, u0};
        for (double t : times) {
            stepper.advance(t);
            const double ts = cfg.direction_sign() * t;
            EvolutionLog log{label, "conjugated", ts, 0.0, stepper.boundary, stepper.steps, stepper.matvecs,
                             stepper.ok, stepper.failure};
            std::optional<GridFunction> Ut;
            if (stepper.ok) {
                GridFunction conj = schrod::free_propagate(stepper.state, -ts).u_t;
                log.norm_drift = relative_drift(u0, conj);
                log.boundary_mass = std::max(log.boundary_mass, schrod::boundary_mass(conj));
                if (sink) sink->snapshot(label + "_t" + num(t), conj);
                Ut = schrod::refine(conj, cfg.grid.refine);
            }
            v.evolutions.push_back(log);
            warn_boundary(v, log);

            std::vector<SeedRecord> batch(probes.size());
            parallel_for(probes.size(), cfg.threads, [&](std::size_t i) {
                SeedRecord r = make_record(probes[i], label, ts);
                r.before = before[i];
                if (!before_notes[i].empty()) r.note += (r.note.empty() ? "" : "; ") + before_notes[i];
                if (!probes[i].skip && probes[i].usable) {
                    if (Ut) r.after = estimate(*Ut, probes[i].image, cfg, cfg.analysis_thresholds(), r.note);
                    else r.note += (r.note.empty() ? "" : "; ") + ("propagation failed: " + stepper.failure);
                }
                finish_record(r, probes[i].skip);
                if (sink) sink->record(index + i, r);
                batch[i] = std::move(r);
            });
            index += probes.size();
            for (auto& r : batch) v.records.push_back(std::move(r));
        }
    }
    v.summary = summarize(v.records, cfg.min_agreement, cfg.max_undetermined);
    return v;
}

TheoremVerdict run_flat_experiment(const ExperimentConfig& cfg, RunSink* sink) {
    require(cfg, {Requirement::seeds, Requirement::data, Requirement::flat_metric});
    TheoremVerdict v;
    v.experiment = "flat";
    const auto seeds = cfg.all_seeds();
    const int n = cfg.field.n;

    std::vector<Probe> probes(seeds.size());
    parallel_for(seeds.size(), cfg.threads, [&](std::size_t i) {
        Probe& p = probes[i];
        p.role = "seed";
        p.seed_index = static_cast<int>(i);
        p.pre = p.image = seeds[i];
        try {
            p.trapping = flow::classify_nontrapping(cfg.field, seeds[i], cfg.direction(), cfg.classify);
        } catch (const std::exception& e) {
            p.note = std::string("classification failed: ") + e.what();
        }
        p.trajectory = trajectory_for(cfg, seeds[i]);
    });
    for (const auto& p : probes) {
        v.trajectories.push_back(p.trajectory);
        v.trajectory_labels.push_back("seed" + std::to_string(p.seed_index));
    }

    std::vector<double> times = cfg.times;
    std::sort(times.begin(), times.end());
    const schrod::DiscreteHamiltonian H(cfg.field, n, cfg.grid.L, cfg.grid.N);
    std::size_t index = 0;

    for (const auto& d : cfg.data) {
        const std::string label = d.label();
        const GridFunction u0 = make_initial_data(d, n, cfg.grid.L, cfg.grid.N);
        if (sink) sink->snapshot(label + "_u0", u0);
        Stepper stepper{H, cfg, u0};
        for (double t : times) {
            stepper.advance(t);
            const double ts = cfg.direction_sign() * t;
            const GridFunction free = schrod::free_propagate(u0, ts).u_t;
            EvolutionLog full{label, "H", ts, 0.0, stepper.boundary, stepper.steps, stepper.matvecs, stepper.ok,
                              stepper.failure};
            EvolutionLog free_log{label, "H0", ts, relative_drift(u0, free), schrod::boundary_mass(free), 0, 0, true, ""};
            if (stepper.ok) {
                full.norm_drift = relative_drift(u0, stepper.state);
                full.boundary_mass = std::max(full.boundary_mass, schrod::boundary_mass(stepper.state));
            }
            v.evolutions.push_back(full);
            v.evolutions.push_back(free_log);
            warn_boundary(v, full);
            warn_boundary(v, free_log);
            if (sink) {
                sink->snapshot(label + "_H0_t" + num(t), free);
                if (stepper.ok) sink->snapshot(label + "_H_t" + num(t), stepper.state);
            }
            const GridFunction F = schrod::refine(free, cfg.grid.refine);
            std::optional<GridFunction> U;
            if (stepper.ok) U = schrod::refine(stepper.state, cfg.grid.refine);

            std::vector<SeedRecord> batch(probes.size());
            parallel_for(probes.size(), cfg.threads, [&](std::size_t i) {
                SeedRecord r = make_record(probes[i], label, ts);
                r.wave_converged = true;
                r.before = estimate(F, probes[i].pre, cfg, cfg.analysis_thresholds(), r.note);
                if (U) r.after = estimate(*U, probes[i].image, cfg, cfg.analysis_thresholds(), r.note);
                else r.note += (r.note.empty() ? "" : "; ") + ("propagation failed: " + stepper.failure);
                finish_record(r, false);
                if (sink) sink->record(index + i, r);
                batch[i] = std::move(r);
            });
            index += probes.size();
            for (auto& r : batch) v.records.push_back(std::move(r));
        }
    }
    v.summary = summarize(v.records, cfg.min_agreement, cfg.max_undetermined);
    return v;
}

// ---------------------------------------------------------------------------
// Outputs

void write_verdicts_csv(std::ostream& os, const TheoremVerdict& v, const ExperimentConfig& cfg) {
    os << verdicts_header(cfg.field.n);
    for (std::size_t i = 0; i < v.records.size(); ++i) os << i << ',' << verdict_row(v.records[i], cfg);
}

void write_decay_scans_csv(std::ostream& os, const TheoremVerdict& v) {
    const int n = v.records.empty() ? 1 : static_cast<int>(v.records.front().seed.x.size());
    os << decay_scans_header(n);
    for (std::size_t i = 0; i < v.records.size(); ++i) os << decay_scan_rows(v.records[i], i);
}

void write_trajectories_csv(std::ostream& os, const TheoremVerdict& v) {
    bool header = true;
    for (std::size_t i = 0; i < v.trajectories.size(); ++i) {
        if (v.trajectories[i].states.empty()) continue;
        std::ostringstream one;
        flow::write_trajectory_csv(one, v.trajectories[i], v.trajectory_labels[i]);
        std::string text = one.str();
        if (!header) text.erase(0, text.find('\n') + 1);
        header = false;
        os << text;
    }
}

nlohmann::json to_json(const TheoremVerdict& v, const ExperimentConfig& cfg) {
    using nlohmann::json;
    const auto& s = v.summary;
    json records = json::array();
    for (const auto& r : v.records) {
        json j{{"data", r.data},
               {"t", r.t},
               {"role", r.role},
               {"seed_index", r.seed_index},
               {"x0", vec_json(r.seed.x)},
               {"xi0", vec_json(r.seed.xi)},
               {"trapping", flow::to_string(r.trapping)},
               {"x_plus", vec_json(r.image.x)},
               {"xi_plus", vec_json(r.image.xi)},
               {"wave_converged", r.wave_converged},
               {"wave_residual", r.wave_residual},
               {"wave_horizon", r.wave_horizon},
               {"agreement", to_string(r.agreement)},
               {"note", r.note}};
        j["before"] = r.before ? fbi::to_json(*r.before) : json(nullptr);
        j["after"] = r.after ? fbi::to_json(*r.after) : json(nullptr);
        records.push_back(std::move(j));
    }
    json evolutions = json::array();
    for (const auto& e : v.evolutions)
        evolutions.push_back({{"data", e.data}, {"state", e.state}, {"t", e.t}, {"norm_drift", e.norm_drift},
                              {"boundary_mass", e.boundary_mass}, {"steps", e.steps}, {"matvecs", e.matvecs},
                              {"ok", e.ok}, {"failure", e.failure}});
    return json{{"experiment", v.experiment},
                {"config", to_json(cfg)},
                {"summary", {{"records", s.records}, {"agree", s.agree}, {"disagree", s.disagree},
                             {"undetermined", s.undetermined}, {"skipped", s.skipped},
                             {"agreement_rate", s.agreement_rate}, {"undetermined_fraction", s.undetermined_fraction},
                             {"min_agreement", cfg.min_agreement}, {"max_undetermined", cfg.max_undetermined},
                             {"passed", s.passed}}},
                {"warnings", v.warnings},
                {"evolutions", evolutions},
                {"records", records}};
}

void write_outputs(const TheoremVerdict& v, const ExperimentConfig& cfg, const std::string& dir, bool streamed) {
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        return f;
    };
    if (!streamed) {
        auto f = open("verdicts.csv");
        write_verdicts_csv(f, v, cfg);
        auto g = open("decay_scans.csv");
        write_decay_scans_csv(g, v);
    }
    auto t = open("trajectories.csv");
    write_trajectories_csv(t, v);
    auto r = open("report.json");
    r << to_json(v, cfg).dump(2) << '\n';
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& override_dir) {
    if (override_dir && !override_dir->empty()) return *override_dir;
    if (const char* env = std::getenv("WAVEFRONT_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

}  // namespace wavefront::harness
