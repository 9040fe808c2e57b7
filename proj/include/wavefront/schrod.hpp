#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "wavefront/coeffs.hpp"
#include "wavefront/fbi.hpp"

namespace wavefront::schrod {

/// Angular wavenumbers of axis index i on a grid of N points and half-width L;
/// the Nyquist index carries -N/2.
double wavenumber(int i, int N, double L);

/// In-place n-dimensional DFT (unnormalised forward, inverse scaled by 1/N^n).
void fft_forward(GridFunction& u);
void fft_inverse(GridFunction& u);

/// D_j u = -i d/dx_j u, spectrally.
GridFunction derivative(const GridFunction& u, int axis);

/**
 * H = 1/2 sum D_j a_jk D_k + 1/2 sum (a_j D_j + D_j a_j) + a_0 on a periodic
 * grid, applied matrix-free with FFTs. Coefficients are sampled once.
 */
class DiscreteHamiltonian {
public:
    DiscreteHamiltonian(const coeffs::CoefficientField& field, int n, double L, int N);

    GridFunction apply(const GridFunction& u) const;
    /// Crude bound on the spectral radius, used for diagnostics.
    double spectral_bound() const;

    const coeffs::CoefficientField& field() const { return field_; }
    int n() const { return n_; }
    double L() const { return L_; }
    int N() const { return N_; }

private:
    coeffs::CoefficientField field_;
    int n_;
    double L_;
    int N_;
    std::vector<std::vector<std::vector<double>>> a2_;  // [j][k][point]
    std::vector<std::vector<double>> a1_;
    std::vector<double> a0_;
    std::vector<std::vector<double>> k_;  // per-axis wavenumbers of every grid point
    bool identity_metric_, no_first_order_, no_potential_;
};

struct EvolutionResult {
    GridFunction u_t;
    double t = 0.0;           // time actually reached
    double norm_drift = 0.0;  // | |u_t| - |u0| | / |u0|
    long steps = 0;
    long matvecs = 0;
    bool ok = true;
    std::string failure;
    double boundary_mass = 0.0;  // containment monitor, see boundary_mass()
};

/// e^{-i t h |k|^2 / 2} as an exact Fourier multiplier (h = 1 is the physical H0).
EvolutionResult free_propagate(const GridFunction& u0, double t, double h = 1.0);

struct KrylovOptions {
    int max_dim = 30;
    double shrink = 0.7;
};

/// e^{-itH} u0 by Lanczos exponential steps with a posteriori step control.
EvolutionResult propagate(const DiscreteHamiltonian& H, const GridFunction& u0, double t, double tol = 1e-10,
                          const KrylovOptions& opt = {});

/// u(t) = e^{itH0} e^{-itH} u0.
EvolutionResult conjugated_evolution(const DiscreteHamiltonian& H, const GridFunction& u0, double t,
                                     double tol = 1e-10, const KrylovOptions& opt = {});

/// f^W(x + t h D) u = e^{itA} f(x) e^{-itA} u with A = h D^2 / 2 (exact for linear arguments).
GridFunction weyl_linear_sandwich(const std::function<cplx(const RVec&)>& f, const GridFunction& u, double t,
                                  double h);

/// Band-limited interpolation onto a grid with `factor` times more points per axis.
GridFunction refine(const GridFunction& u, int factor);

/// Relative L2 mass within 2 dx of the box boundary; above 1e-10 the
/// periodic images are no longer negligible.
double boundary_mass(const GridFunction& u);
inline constexpr double kBoundaryWarn = 1e-10;

/// Binary snapshot: int64 n, int64 N, float64 L (little endian), then re/im pairs.
void write_binary(std::ostream& os, const GridFunction& u);
GridFunction read_binary(std::istream& is);
void write_binary_file(const std::string& path, const GridFunction& u);
GridFunction read_binary_file(const std::string& path);

/// x, re, im along axis 0 (other axes fixed at their midpoint index).
void write_slice_csv(std::ostream& os, const GridFunction& u);

}  // namespace wavefront::schrod
