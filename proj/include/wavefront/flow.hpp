#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wavefront/coeffs.hpp"

namespace wavefront::flow {

struct PhasePoint {
    RVec x;
    RVec xi;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<double> energies;
    double energy_tol = 0.0;
    double max_drift = 0.0;
    bool ok = true;
    std::string failure;  // set when the integrator gave up; states hold the partial path
};

struct FlowOptions {
    double hmax = 1.0;       // keeps the recorded path reasonably dense
    int max_retries = 3;     // tolerance tightenings when the energy ledger exceeds tol
};

/// Hamilton flow of p = 1/2 <a(x) xi, xi>; negative t_end integrates backward.
Trajectory integrate_hamilton(const coeffs::CoefficientField& field, const PhasePoint& p0, double t_end,
                              double tol, const FlowOptions& opt = {});

/// Right-hand side (dy/dt, deta/dt) packed as [y; eta].
RVec hamilton_rhs(const coeffs::CoefficientField& field, const RVec& state);

enum class Trapping { nontrapping, trapped, undetermined };
enum class Direction { forward, backward };

std::string to_string(Trapping v);
std::string to_string(Direction d);

struct ClassifyOptions {
    double horizon = 1000.0;
    double escape_radius = 50.0;
    int outward_checkpoints = 10;
    double far_field_margin = 0.1;  // C0 <R>^{-1-sigma} must stay below this
    double tol = 1e-9;
};

Trapping classify_nontrapping(const coeffs::CoefficientField& field, const PhasePoint& p0, Direction dir,
                              const ClassifyOptions& opt = {});
Trapping classify_forward_nontrapping(const coeffs::CoefficientField& field, const PhasePoint& p0,
                                      double horizon = 1000.0, double escape_radius = 50.0);

struct WaveOperatorOptions {
    double t0 = 16.0;           // first horizon
    double max_horizon = 65536.0;
    double energy_tol = 1e-10;
    int richardson_levels = 3;  // exponents sigma, 2 sigma, 3 sigma
};

struct WaveOperatorResult {
    RVec x_plus;
    RVec xi_plus;
    Direction direction = Direction::forward;
    double residual = 0.0;
    double horizon = 0.0;
    bool converged = false;
    std::vector<double> horizons;       // T, 2T, 4T, ...
    std::vector<RVec> raw_estimates;    // (y(T) - T eta(T), eta(T)) before acceleration
    std::string failure;
};

/// Asymptotic data (x+, xi+) of the trajectory through p0.
WaveOperatorResult wave_operator(const coeffs::CoefficientField& field, const PhasePoint& p0, Direction dir,
                                 double tol, const WaveOperatorOptions& opt = {});

/// Preimage (x0, xi0) with wave_operator(x0, xi0) = (x_plus, xi_plus).
struct InverseResult {
    PhasePoint point;
    double residual = 0.0;
    bool converged = false;
};
InverseResult inverse_wave_operator(const coeffs::CoefficientField& field, const PhasePoint& asymptotic,
                                    Direction dir, double tol, const WaveOperatorOptions& opt = {});

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& label = "");

}  // namespace wavefront::flow
