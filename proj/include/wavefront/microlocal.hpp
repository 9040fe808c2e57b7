#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavefront/coeffs.hpp"
#include "wavefront/fbi.hpp"
#include "wavefront/flow.hpp"

namespace wavefront::microlocal {

/// Point (z, zeta) of C^{2n}. The FBI side of real phase space is the set zeta = -Im z.
struct ComplexPhasePoint {
    CVec z;
    CVec zeta;

    bool on_real_base(double tol = 1e-12) const;
};

/// kappa(x, xi) = (x - i xi, xi).
ComplexPhasePoint kappa(const RVec& x, const RVec& xi);
/// Inverse on the real base; throws DomainError when zeta is not real or zeta != -Im z beyond 1e-12.
flow::PhasePoint kappa_inv(const ComplexPhasePoint& p);
/// (z + i zeta, zeta) without any restriction.
ComplexPhasePoint kappa_inv_complex(const ComplexPhasePoint& p);

/// b(s, z, zeta) = 1/2 sum (a_jk(z + i zeta + s zeta) - delta_jk) zeta_j zeta_k.
cplx b_symbol(const coeffs::CoefficientField& field, double s, const CVec& z, const CVec& zeta);

struct BGradient {
    cplx b;
    CVec grad_z;
    CVec grad_zeta;
};
BGradient b_gradient(const coeffs::CoefficientField& field, double s, const CVec& z, const CVec& zeta);

enum class Route { automatic, composition, complex_ode };

/// R_s(start): composition with the real Hamilton flow on the real base, otherwise
/// the complexified Hamilton system of b with the tube checked at every stage.
ComplexPhasePoint twisted_flow(const coeffs::CoefficientField& field, double s, const ComplexPhasePoint& start,
                               double tol, Route route = Route::automatic);

/// Inverse map R_s^{-1}: b is time dependent, so this is the flow from s back to 0
/// rather than R_{-s}.
ComplexPhasePoint twisted_flow_inverse(const coeffs::CoefficientField& field, double s, const ComplexPhasePoint& end,
                                       double tol, Route route = Route::automatic);

struct GeneratingOptions {
    double fd_step = 1e-4;
    double newton_step = 1e-5;  // Jacobian of y -> z~(s; y, eta)
    int max_newton = 25;
    bool gradients = true;
};

struct GeneratingSample {
    double s = 0.0;
    CVec z;
    CVec eta;
    cplx psi = 0.0;
    CVec grad_z_psi;    // finite differences
    CVec grad_eta_psi;  // finite differences
    CVec y;             // J_{s,eta}^{-1}(z)
    CVec zeta_s;        // zeta component of R_s(y, eta)
    bool converged = false;
    int newton_iterations = 0;
    double residual = 0.0;
    std::string failure;
};

/// psi(s, z, eta) = y.eta + int_0^s (zeta . grad_zeta b - b) along R_s' (y, eta),
/// where y solves z~(s; y, eta) = z by damped Newton started at y = z.
GeneratingSample generating_function(const coeffs::CoefficientField& field, double s, const CVec& z,
                                     const CVec& eta, double tol, const GeneratingOptions& opt = {});

struct PsiInfinity {
    cplx psi = 0.0;
    GeneratingSample last;
    std::vector<double> horizons;
    std::vector<cplx> raw;
    bool converged = false;
};

/// Large-s limit of psi by horizon doubling with Richardson extrapolation in s^{-sigma}.
PsiInfinity psi_infinity(const coeffs::CoefficientField& field, const CVec& z, const CVec& eta, double tol,
                         double s0 = 16.0, double s_max = 4096.0);

struct SaddleReport {
    double s = 0.0;
    CVec z;
    CVec y_pred, eta_pred;  // R_s^{-1}(z, -Im z)
    CVec y_crit, eta_crit;  // Newton on the critical-point equations
    double gradient_norm = 0.0;
    double critical_value = 0.0;
    double value_gap = 0.0;
    double sigma_min = 0.0;  // smallest singular value of I + Im Hess_eta psi
    double crit_distance = 0.0;
    bool converged = false;
    std::string failure;
};

/// Diagnostics of (y, eta) -> Phi_0(y) - Im(psi(s, z, eta) - y.eta) near R_s^{-1}(z, -Im z).
SaddleReport saddle_check(const coeffs::CoefficientField& field, double s, const CVec& z, double tol);

struct EgorovRow {
    double h = 0.0;
    cplx ratio = 0.0;
    double error = 0.0;
};

struct EgorovReport {
    flow::PhasePoint point;
    double t = 0.0;
    cplx target = 0.0;
    std::vector<EgorovRow> rows;
    double order = 0.0;  // p in error = h^p (a + b h), fitted over the whole grid
    double slope = 0.0;  // plain least-squares slope of log error against log h
    bool exact = false;  // every error below 1e-14
    std::string flag;
};

/// Compares T(f^W(x + t h D) u_h)(z0) / T u_h(z0) with f(x0 + t xi0) for coherent states u_h.
EgorovReport symbol_action_check(const std::function<cplx(const RVec&)>& f, const flow::PhasePoint& p0, double t,
                                 const std::vector<double>& h_grid, double L = 16.0, int N = 8192);

struct ContourReport {
    CVec z;
    double R = 0.0;
    int samples = 0;
    double max_residual = 0.0;
    double best_constant = 0.0;  // smallest C with phi - Phi_0(z) <= -(|x - Re z|^2 + |y - z|^2) / C
    double max_x_ratio = 0.0;    // max |x - Re z| / |y - z|
    bool bound_holds = true;
};

/// x on the contour through y: (y + z)/2 - i Im z - R conj(z - y).
CVec contour_point(const CVec& z, const CVec& y, double R);

/// Checks phi_z(x, y) = Phi_0(z) - (R - 1/2)|Im(y - z)|^2 - R|Re(y - z)|^2 on the contour.
ContourReport contour_diagnostics(const CVec& z, const std::vector<CVec>& y_samples, double R);

/// Uniform samples in the ball |y - z| < r.
std::vector<CVec> contour_samples(const CVec& z, double r, int count, std::uint64_t seed);

nlohmann::json to_json(const SaddleReport& r);
nlohmann::json to_json(const EgorovReport& r);
nlohmann::json to_json(const ContourReport& r);
nlohmann::json to_json(const GeneratingSample& g);

void write_generating_csv(std::ostream& os, const std::vector<GeneratingSample>& rows);

}  // namespace wavefront::microlocal
