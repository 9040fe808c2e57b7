#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavefront/types.hpp"

namespace wavefront::coeffs {

/// Scalar coefficient evaluator, holomorphic on the tube of the owning field.
using Evaluator = std::function<cplx(const CVec&)>;

enum class Kind { second_order, first_order, potential };

/// Selects one coefficient a_{j,k}, a_j or a_0 of a field.
struct Selector {
    Kind kind = Kind::potential;
    int j = 0;
    int k = 0;

    static Selector a2(int j, int k) { return {Kind::second_order, j, k}; }
    static Selector a1(int j) { return {Kind::first_order, j, 0}; }
    static Selector a0() { return {Kind::potential, 0, 0}; }

    std::string label() const;
};

/**
 * Coefficients of H = 1/2 sum D_j a_{jk} D_k + 1/2 sum (a_j D_j + D_j a_j) + a_0
 * together with the decay metadata (sigma, C0) and the tube width nu.
 *
 * Evaluators take complex arguments; real arguments are embedded with zero
 * imaginary part. The tube is taken componentwise:
 * |Im z_j| < nu <Re z_j> for every j.
 */
struct CoefficientField {
    int n = 1;
    std::vector<std::vector<Evaluator>> a2;
    std::vector<Evaluator> a1;
    Evaluator a0;
    double sigma = 1.0;
    double c0 = 1.0;
    double nu = 0.5;
    std::string name;

    // Structural hints; conservative defaults are always correct.
    bool metric_is_identity = false;
    bool first_order_vanishes = false;
    bool potential_vanishes = false;

    const Evaluator& get(Selector s) const;

    /// Index of the first component violating the tube bound, if any.
    std::optional<int> tube_violation(const CVec& z) const;
    bool in_tube(const CVec& z) const { return !tube_violation(z).has_value(); }
    void require_tube(const CVec& z) const;

    /// Unchecked evaluation; callers that need the tube guard use eval_complex().
    cplx value(Selector s, const CVec& z) const { return get(s)(z); }
    double value(Selector s, const RVec& x) const { return get(s)(complexify(x)).real(); }

    RMat metric(const RVec& x) const;
    CMat metric(const CVec& z) const;

    /// Holomorphic partial derivative d/dz_l of one coefficient (Cauchy integral).
    cplx partial(Selector s, const CVec& z, int l) const;
    /// grad[l](j,k) = d a_{jk} / d z_l.
    std::vector<CMat> metric_gradient(const CVec& z) const;
};

/// p(x, xi) = 1/2 sum a_{jk}(x) xi_j xi_k.
double eval_symbol(const CoefficientField& field, const RVec& x, const RVec& xi);

/// Holomorphic extension value; throws DomainError outside the tube.
cplx eval_complex(const CoefficientField& field, Selector which, const CVec& z);

// ---------------------------------------------------------------------------
// Short-range decay and ellipticity validation

struct SamplingSpec {
    std::vector<RVec> real_points;
    std::vector<CVec> tube_points;
};

/// Axis-aligned rays out to |x| = 1024 plus `random_points` seeded tube points.
SamplingSpec default_sampling(int n, double nu, std::uint64_t seed, int random_points = 200);

struct DecaySample {
    std::string coefficient;
    CVec point;
    double ratio = 0.0;
    bool violated = false;
};

struct ValidationReport {
    std::string field;
    std::vector<DecaySample> decay;
    int decay_violations = 0;
    int symmetry_violations = 0;
    int realness_violations = 0;
    int definiteness_violations = 0;
    int nonfinite_values = 0;
    double max_ratio = 0.0;
    double min_eigenvalue = 0.0;
    std::vector<std::string> messages;

    bool passed() const {
        return decay_violations == 0 && symmetry_violations == 0 && realness_violations == 0
            && definiteness_violations == 0 && nonfinite_values == 0;
    }
};

/// Never throws on violations; every problem becomes a report entry.
ValidationReport validate_assumption_a(const CoefficientField& field, const SamplingSpec& samples);

// ---------------------------------------------------------------------------
// Builtins

CoefficientField flat(int n = 1);
CoefficientField conformal1d(double c = 1.0, double nu = 0.9);
CoefficientField gauss_bump(double c = 0.3, double nu = 0.9);
CoefficientField potential_only(double c = 1.0, double nu = 0.9);
CoefficientField conformal2d_well(double c = 0.5, double nu = 0.9);
/// a_{jk} = (1 - c exp(-|x|^4)) delta_{jk} on the tube nu = 0.3; traps rays for c > 0.83.
CoefficientField trapping2d_well(double c = 0.9);

/// Named fields with their default parameters.
const std::map<std::string, CoefficientField>& builtin_fields();

/// Builtin by name with an optional strength override; nullopt on a miss.
std::optional<CoefficientField> make_builtin(const std::string& name, std::optional<double> c = std::nullopt);

}  // namespace wavefront::coeffs
