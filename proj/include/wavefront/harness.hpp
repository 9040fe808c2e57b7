#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "wavefront/coeffs.hpp"
#include "wavefront/fbi.hpp"
#include "wavefront/flow.hpp"
#include "wavefront/schrod.hpp"

namespace wavefront::harness {

/// A config file is missing, malformed or violates an invariant; what() names it.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Initial data

/**
 * Profiles in x1 times a Gaussian envelope in every coordinate:
 *   gaussian  e^{-|x - x0|^2 / 2w^2}
 *   jump      H(x1 - x0_1) * gaussian, value 1/2 on the jump
 *   flat      e^{-1/(x1 - x0_1)} H(x1 - x0_1) * gaussian
 * then multiplied by e^{i omega x1}. A nonzero refocus tau replaces the result
 * by e^{i tau H0} applied to it, so that e^{-i tau H0} u0 is the plain profile.
 */
struct DataSpec {
    std::string kind = "gaussian";
    double x0 = 0.0;
    double width = 1.0;
    double omega = 0.0;
    double refocus = 0.0;
    std::string name;  // optional label; derived from the parameters when empty

    std::string label() const;
};

GridFunction make_initial_data(const DataSpec& d, int n, double L, int N);

// ---------------------------------------------------------------------------
// Configuration

struct GridSpec {
    double L = 160.0;
    int N = 16384;
    int refine = 8;  // spectral refinement before the FBI scan

    double analysis_dx() const { return 2.0 * L / (static_cast<double>(N) * refine); }
    /// Refinement interpolates; the data carry no wavenumbers beyond the coarse Nyquist.
    double band_limit() const { return std::numbers::pi * N / (2.0 * L); }
};

struct RandomSeeds {
    int count = 0;
    double x_min = -1.0, x_max = 1.0;
    double xi_min = 0.5, xi_max = 2.0;  // |xi| range; the sign is drawn too
};

struct EgorovSpec {
    std::string f = "1/(1+x^2)";
    std::vector<double> times{0.0, 1.0, 2.0};
    std::vector<double> h_grid{0.1, 0.05, 0.025};
    double L = 16.0;
    int N = 8192;
    double min_order = 0.9;
};

struct SaddleSpec {
    std::vector<double> s{0.5, 1.0, 2.0};
    std::vector<CVec> z;
    double tol = 1e-10;
    double gradient_tol = 1e-6;
    double gap_tol = 1e-6;
    double sigma_floor = 0.1;
};

struct ContourSpec {
    std::vector<CVec> z;
    double R = 2.0;
    double radius = 0.5;
    int samples = 100;
    double residual_tol = 1e-12;
};

struct ExperimentConfig {
    std::string source;  // path the config was read from

    std::string field_name;
    coeffs::CoefficientField field;
    nlohmann::json field_echo;

    GridSpec grid;
    std::vector<double> times{1.0};
    bool time_reversal = false;

    std::vector<DataSpec> data;
    std::vector<flow::PhasePoint> seeds;
    RandomSeeds random_seeds;

    bool controls = true;
    double control_offset = 1.0;

    std::vector<double> h_grid = fbi::default_h_grid();
    double omega_radius = 0.1;
    fbi::Thresholds thresholds;

    flow::ClassifyOptions classify;
    double flow_tol = 1e-10;
    double flow_t_end = 20.0;
    flow::WaveOperatorOptions wave;
    double wave_tol = 1e-8;

    double krylov_tol = 1e-10;
    schrod::KrylovOptions krylov;

    double min_agreement = 0.95;
    double max_undetermined = 0.2;

    int validate_random_points = 200;
    EgorovSpec egorov;
    SaddleSpec saddle;
    ContourSpec contour;

    std::string output_dir = "out";
    bool snapshots = true;
    int threads = 0;  // 0: hardware concurrency
    std::uint64_t seed = 1;

    /// Seeds after expanding the random block with `seed`.
    std::vector<flow::PhasePoint> all_seeds() const;
    double direction_sign() const { return time_reversal ? -1.0 : 1.0; }
    fbi::Thresholds analysis_thresholds() const {
        fbi::Thresholds th = thresholds;
        th.band_limit = grid.band_limit();
        return th;
    }
    flow::Direction direction() const { return time_reversal ? flow::Direction::backward : flow::Direction::forward; }
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& yaml_text, const std::string& source = "<string>");

/// What a subcommand needs from the config; each check throws ConfigError naming the invariant.
enum class Requirement { seeds, data, flat_metric };
void require(const ExperimentConfig& cfg, std::initializer_list<Requirement> reqs);

nlohmann::json to_json(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Parallel pool and ordered output

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Exceptions are rethrown after the join.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Single writer: chunks submitted out of order are emitted in index order.
class OrderedWriter {
public:
    explicit OrderedWriter(std::ostream& os, std::size_t first = 0) : os_(os), next_(first) {}
    void submit(std::size_t index, std::string chunk);
    std::size_t next() const { return next_; }

private:
    std::ostream& os_;
    std::size_t next_;
    std::map<std::size_t, std::string> pending_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Experiments

enum class Agreement { agree, disagree, undetermined, skipped };
std::string to_string(Agreement a);

struct SeedRecord {
    std::string data;
    double t = 0.0;
    std::string role;  // image, control-, control+ or seed (flat experiment)
    int seed_index = 0;
    flow::PhasePoint seed;       // phase point probed in the reference state
    flow::Trapping trapping = flow::Trapping::undetermined;
    flow::PhasePoint image;      // phase point probed in the evolved state
    double wave_residual = 0.0;
    double wave_horizon = 0.0;
    bool wave_converged = false;
    std::optional<fbi::DecayEstimate> before;
    std::optional<fbi::DecayEstimate> after;
    Agreement agreement = Agreement::undetermined;
    std::string note;
};

struct Summary {
    int records = 0;
    int agree = 0;
    int disagree = 0;
    int undetermined = 0;
    int skipped = 0;
    double agreement_rate = 0.0;       // agree / (agree + disagree)
    double undetermined_fraction = 0.0;  // undetermined / (records - skipped)
    bool passed = false;
};

struct EvolutionLog {
    std::string data;
    std::string state;  // "H" or "H0" or "conjugated"
    double t = 0.0;
    double norm_drift = 0.0;
    double boundary_mass = 0.0;
    long steps = 0;
    long matvecs = 0;
    bool ok = true;
    std::string failure;
};

struct TheoremVerdict {
    std::string experiment;  // "theorem" or "flat"
    std::vector<SeedRecord> records;
    std::vector<EvolutionLog> evolutions;
    std::vector<flow::Trajectory> trajectories;
    std::vector<std::string> trajectory_labels;
    std::vector<std::string> warnings;
    Summary summary;
};

Summary summarize(const std::vector<SeedRecord>& records, double min_agreement, double max_undetermined);

std::string verdicts_header(int n);
std::string verdict_row(const SeedRecord& r, const ExperimentConfig& cfg);
std::string decay_scans_header(int n);
std::string decay_scan_rows(const SeedRecord& r, std::size_t record_index);

/// Streams verdicts.csv and decay_scans.csv as records complete, in record order,
/// and stores binary snapshots under <dir>/snapshots.
class RunSink {
public:
    RunSink(const std::string& dir, const ExperimentConfig& cfg);
    void record(std::size_t index, const SeedRecord& r);
    void snapshot(const std::string& name, const GridFunction& u);
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    const ExperimentConfig& cfg_;
    std::ofstream verdicts_file_, scans_file_;
    OrderedWriter verdicts_, scans_;
};

/// classify -> wave operator -> u0 -> e^{itH0}e^{-itH}u0 -> decay fits at (x0, xi0) and (x+, xi+).
/// Controls at (x+ +- offset e1, xi+) are added with preimages from the inverse wave operator.
TheoremVerdict run_theorem_experiment(const ExperimentConfig& cfg, RunSink* sink = nullptr);

/// Verdict maps of e^{-itH}u0 and e^{-itH0}u0 on the seed grid; requires a flat metric.
TheoremVerdict run_flat_experiment(const ExperimentConfig& cfg, RunSink* sink = nullptr);

/// trajectories.csv and report.json, plus verdicts.csv and decay_scans.csv unless a sink already streamed them.
void write_outputs(const TheoremVerdict& v, const ExperimentConfig& cfg, const std::string& dir, bool streamed);

void write_verdicts_csv(std::ostream& os, const TheoremVerdict& v, const ExperimentConfig& cfg);
void write_decay_scans_csv(std::ostream& os, const TheoremVerdict& v);
void write_trajectories_csv(std::ostream& os, const TheoremVerdict& v);
nlohmann::json to_json(const TheoremVerdict& v, const ExperimentConfig& cfg);

/// Output directory: explicit override, then $WAVEFRONT_OUTPUT_DIR, then the config value.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& override_dir);

}  // namespace wavefront::harness
