#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wavefront/types.hpp"

namespace wavefront {

/// Complex samples on the periodic box [-L, L)^n with N points per axis.
/// Axis 0 varies slowest; x_i = -L + i dx.
struct GridFunction {
    int n = 1;
    double L = 1.0;
    int N = 2;
    std::vector<cplx> values;

    GridFunction() = default;
    GridFunction(int n_, double L_, int N_);

    double dx() const { return 2.0 * L / N; }
    double coord(int i) const { return -L + i * dx(); }
    std::size_t size() const { return values.size(); }
    double l2_norm() const;

    /// Fill by evaluating f at every grid point.
    static GridFunction sample(int n, double L, int N, const std::function<cplx(const RVec&)>& f);
};

}  // namespace wavefront

namespace wavefront::fbi {

class ContainmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phase point (x0, xi0) seen as z = x0 - i xi0.
struct FbiPoint {
    RVec x0;
    RVec xi0;
    CVec z() const;
    static FbiPoint from_z(const CVec& z);
};

inline double phi0(const CVec& z) { return 0.5 * z.imag().squaredNorm(); }

/// Tu(z,h) = int exp(-(z-x)^2 / 2h) u(x) dx (no normalising prefactor).
cplx fbi_transform(const GridFunction& u, const CVec& z, double h);

/// e^{-Phi0(z)/h} Tu(z,h), evaluated without forming the large factor.
cplx weighted_fbi(const GridFunction& u, const CVec& z, double h);

/// Complex ball of radius `radius` about z0 in C^n = R^{2n}.
struct Omega {
    CVec z0;
    double radius = 0.1;
};

/// Lattice z0 + spacing Z^{2n} intersected with the closed ball.
std::vector<CVec> omega_lattice(const Omega& omega, double spacing);

/// Discrete L^2(Omega) norm of e^{-Phi0/h}|Tu| on the lattice of the given spacing
/// (default radius / 2), cell volume spacing^{2n}.
double weighted_fbi_norm(const GridFunction& u, const Omega& omega, double h,
                         std::optional<double> spacing = std::nullopt);

struct Thresholds {
    double delta_reg = 0.05;
    double delta_sing = 0.01;
    double r2_min = 0.98;
    double noise_rel = 1e-12;  // censoring level relative to sum |window u| dx^n
    // An h is used only if |xi0_j|/h + band_sigmas/sqrt(h) <= band_limit for every j, i.e. the
    // Gaussian frequency window stays inside the band the data carries. 0: the grid's own pi/dx.
    double band_limit = 0.0;
    double band_sigmas = 8.0;
};

inline std::vector<double> default_h_grid() { return {0.2, 0.1, 0.05, 0.025}; }

enum class Verdict { regular, singular, undetermined };
std::string to_string(Verdict v);

struct DecayEstimate {
    FbiPoint point;
    std::vector<double> h_values;
    std::vector<double> log_norms;
    std::vector<double> log_floors;
    std::vector<bool> censored;
    double omega_radius = 0.1;  // radius used at the largest h
    double delta_hat = 0.0;
    double r2 = 0.0;
    double log_h_coeff = 0.0;  // nuisance polynomial-prefactor exponent
    Verdict verdict = Verdict::undetermined;
    std::string flag;          // empty, or why the verdict is qualified
};

/**
 * Fit log N(h) = c0 + c1 log h - delta / h over the h scan. Omega shrinks with
 * h (radius omega_radius * h / max h) so the weight offset inside Omega does
 * not leak into delta. Norms below the noise floor are censored.
 */
DecayEstimate decay_rate_estimate(const GridFunction& u, const FbiPoint& z0, const std::vector<double>& h_grid,
                                  double omega_radius = 0.1, const Thresholds& th = {});

struct WavefrontEntry {
    FbiPoint seed;
    std::optional<DecayEstimate> estimate;
    std::string error;
    Verdict verdict() const { return estimate ? estimate->verdict : Verdict::undetermined; }
};

struct WavefrontReport {
    std::vector<WavefrontEntry> entries;
};

WavefrontReport wavefront_indicator(const GridFunction& u, const std::vector<FbiPoint>& seeds,
                                    const std::vector<double>& h_grid, const Thresholds& th = {},
                                    double omega_radius = 0.1);

void write_report_csv(std::ostream& os, const WavefrontReport& rep);
nlohmann::json to_json(const DecayEstimate& e);
nlohmann::json to_json(const WavefrontReport& rep);

}  // namespace wavefront::fbi
