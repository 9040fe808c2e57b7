#include "wavefront/coeffs.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace wavefront::coeffs {

std::string Selector::label() const {
    switch (kind) {
        case Kind::second_order: return "a2[" + std::to_string(j) + "][" + std::to_string(k) + "]";
        case Kind::first_order: return "a1[" + std::to_string(j) + "]";
        case Kind::potential: return "a0";
    }
    return "?";
}

const Evaluator& CoefficientField::get(Selector s) const {
    switch (s.kind) {
        case Kind::second_order:
            if (s.j < 0 || s.j >= n || s.k < 0 || s.k >= n) throw std::out_of_range("coefficient index " + s.label());
            return a2[s.j][s.k];
        case Kind::first_order:
            if (s.j < 0 || s.j >= n) throw std::out_of_range("coefficient index " + s.label());
            return a1[s.j];
        case Kind::potential: return a0;
    }
    throw std::logic_error("bad selector");
}

std::optional<int> CoefficientField::tube_violation(const CVec& z) const {
    for (int j = 0; j < z.size(); ++j) {
        const double bound = nu * japanese(z[j].real());
        if (!(std::abs(z[j].imag()) < bound)) return j;
    }
    return std::nullopt;
}

void CoefficientField::require_tube(const CVec& z) const {
    if (z.size() != n) throw std::invalid_argument("point has dimension " + std::to_string(z.size())
                                                   + ", field " + name + " expects " + std::to_string(n));
    if (auto j = tube_violation(z)) {
        std::ostringstream os;
        os << "point outside tube of " << name << ": |Im z_" << *j << "| = " << std::abs(z[*j].imag())
           << " >= nu<Re z_" << *j << "> = " << nu * japanese(z[*j].real());
        throw DomainError(os.str());
    }
}

RMat CoefficientField::metric(const RVec& x) const {
    const CVec z = complexify(x);
    RMat a(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) a(j, k) = a2[j][k](z).real();
    return a;
}

CMat CoefficientField::metric(const CVec& z) const {
    CMat a(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) a(j, k) = a2[j][k](z);
    return a;
}

namespace {

constexpr int kCauchyPoints = 24;

// Any singularity lies at least `margin` away, so r = margin/4 keeps the aliasing
// error near 4^{-M}; a radius growing with |Re z| also keeps the roundoff of
// far-field values (a = 1 + tiny) from swamping tiny derivatives.
double cauchy_radius(const CoefficientField& f, const CVec& z, int l) {
    const double margin = f.nu * japanese(z[l].real()) - std::abs(z[l].imag());
    return 0.25 * margin;
}

const std::array<cplx, kCauchyPoints>& roots_of_unity() {
    static const std::array<cplx, kCauchyPoints> w = [] {
        std::array<cplx, kCauchyPoints> r;
        for (int m = 0; m < kCauchyPoints; ++m) r[m] = std::polar(1.0, 2 * std::numbers::pi * m / kCauchyPoints);
        return r;
    }();
    return w;
}

}  // namespace

// f'(z) = (1/M r) sum_m f(z + r w^m) w^{-m}; aliasing error O((r/R)^M).
cplx CoefficientField::partial(Selector s, const CVec& z, int l) const {
    const Evaluator& f = get(s);
    const double r = cauchy_radius(*this, z, l);
    const auto& w = roots_of_unity();
    CVec p = z;
    cplx acc = 0.0;
    for (int m = 0; m < kCauchyPoints; ++m) {
        p[l] = z[l] + r * w[m];
        acc += f(p) * std::conj(w[m]);
    }
    return acc / (r * kCauchyPoints);
}

std::vector<CMat> CoefficientField::metric_gradient(const CVec& z) const {
    std::vector<CMat> g(n, CMat::Zero(n, n));
    if (metric_is_identity) return g;
    const auto& w = roots_of_unity();
    CVec p = z;
    for (int l = 0; l < n; ++l) {
        const double r = cauchy_radius(*this, z, l);
        for (int m = 0; m < kCauchyPoints; ++m) {
            p[l] = z[l] + r * w[m];
            for (int j = 0; j < n; ++j)
                for (int k = j; k < n; ++k) g[l](j, k) += a2[j][k](p) * std::conj(w[m]);
        }
        p[l] = z[l];
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                g[l](j, k) /= r * kCauchyPoints;
                g[l](k, j) = g[l](j, k);
            }
    }
    return g;
}

double eval_symbol(const CoefficientField& field, const RVec& x, const RVec& xi) {
    if (x.size() != field.n || xi.size() != field.n)
        throw std::invalid_argument("eval_symbol: expected vectors of length " + std::to_string(field.n));
    return 0.5 * xi.dot(field.metric(x) * xi);
}

cplx eval_complex(const CoefficientField& field, Selector which, const CVec& z) {
    field.require_tube(z);
    return field.value(which, z);
}

// ---------------------------------------------------------------------------

SamplingSpec default_sampling(int n, double nu, std::uint64_t seed, int random_points) {
    SamplingSpec spec;
    std::vector<RVec> dirs;
    for (int j = 0; j < n; ++j) {
        RVec e = RVec::Zero(n);
        e[j] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    if (n > 1) {
        dirs.push_back(RVec::Constant(n, 1.0 / std::sqrt(double(n))));
        dirs.push_back(RVec::Constant(n, -1.0 / std::sqrt(double(n))));
    }
    std::vector<double> radii{0.0, 0.25, 0.5, 1.0};
    for (double r = 2.0; r <= 1024.0; r *= 2) radii.push_back(r);
    const double thetas[] = {-0.99, -0.5, 0.5, 0.99};
    for (const RVec& d : dirs)
        for (double r : radii) {
            const RVec x = r * d;
            spec.real_points.push_back(x);
            for (double th : thetas) {
                CVec all = complexify(x);
                for (int j = 0; j < n; ++j) {
                    CVec z = complexify(x);
                    z[j] += I * (th * nu * japanese(x[j]));
                    all[j] = z[j];
                    spec.tube_points.push_back(z);
                }
                if (n > 1) spec.tube_points.push_back(all);
            }
        }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-20.0, 20.0), unit(-1.0, 1.0);
    for (int i = 0; i < random_points; ++i) {
        RVec x(n);
        for (int j = 0; j < n; ++j) x[j] = box(rng);
        spec.real_points.push_back(x);
    }
    for (int i = 0; i < random_points; ++i) {
        CVec z(n);
        for (int j = 0; j < n; ++j) {
            const double re = box(rng);
            z[j] = cplx(re, 0.999 * unit(rng) * nu * japanese(re));
        }
        spec.tube_points.push_back(z);
    }
    return spec;
}

namespace {

struct DecayRule {
    Selector sel;
    double power_offset;  // exponent is power_offset - sigma
    cplx reference;
};

std::vector<DecayRule> decay_rules(const CoefficientField& f) {
    std::vector<DecayRule> rules;
    for (int j = 0; j < f.n; ++j)
        for (int k = j; k < f.n; ++k) rules.push_back({Selector::a2(j, k), -1.0, j == k ? 1.0 : 0.0});
    for (int j = 0; j < f.n; ++j) rules.push_back({Selector::a1(j), 0.0, 0.0});
    rules.push_back({Selector::a0(), 1.0, 0.0});
    return rules;
}

}  // namespace

ValidationReport validate_assumption_a(const CoefficientField& field, const SamplingSpec& samples) {
    ValidationReport rep;
    rep.field = field.name;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    const auto rules = decay_rules(field);
    constexpr double kAccept = 1.0 + 1e-9;

    auto record = [&](const DecayRule& rule, const CVec& z) {
        const cplx v = field.value(rule.sel, z);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            ++rep.nonfinite_values;
            rep.messages.push_back(rule.sel.label() + " not finite at a sampled point");
            return;
        }
        RVec re(z.size());
        for (int j = 0; j < z.size(); ++j) re[j] = z[j].real();
        const double bound = field.c0 * std::pow(japanese(re), rule.power_offset - field.sigma);
        DecaySample s{rule.sel.label(), z, std::abs(v - rule.reference) / bound, false};
        s.violated = !(s.ratio <= kAccept);
        if (s.violated) ++rep.decay_violations;
        rep.max_ratio = std::max(rep.max_ratio, s.ratio);
        rep.decay.push_back(std::move(s));
    };

    for (const RVec& x : samples.real_points) {
        if (x.size() != field.n) {
            rep.messages.push_back("skipped sample of wrong dimension");
            continue;
        }
        const CVec z = complexify(x);
        for (const auto& rule : rules) {
            record(rule, z);
            const cplx v = field.value(rule.sel, z);
            if (std::abs(v.imag()) > 1e-14) {
                ++rep.realness_violations;
                rep.messages.push_back(rule.sel.label() + " has nonzero imaginary part on a real point");
            }
        }
        RMat a(field.n, field.n);
        for (int j = 0; j < field.n; ++j)
            for (int k = 0; k < field.n; ++k) a(j, k) = field.value(Selector::a2(j, k), z).real();
        for (int j = 0; j < field.n; ++j)
            for (int k = j + 1; k < field.n; ++k)
                if (std::abs(a(j, k) - a(k, j)) > 1e-14 * std::max(1.0, std::abs(a(j, k)))) {
                    ++rep.symmetry_violations;
                    rep.messages.push_back("asymmetric a2 at a real point");
                }
        const double lmin = Eigen::SelfAdjointEigenSolver<RMat>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, lmin);
        if (!(lmin > 0)) {
            ++rep.definiteness_violations;
            rep.messages.push_back("a2 not positive definite at a real point");
        }
    }
    for (const CVec& z : samples.tube_points) {
        if (z.size() != field.n || !field.in_tube(z)) {
            rep.messages.push_back("skipped tube sample outside the tube");
            continue;
        }
        for (const auto& rule : rules) record(rule, z);
        for (int j = 0; j < field.n; ++j)
            for (int k = j + 1; k < field.n; ++k) {
                const cplx ajk = field.value(Selector::a2(j, k), z), akj = field.value(Selector::a2(k, j), z);
                if (std::abs(ajk - akj) > 1e-14 * std::max(1.0, std::abs(ajk))) {
                    ++rep.symmetry_violations;
                    rep.messages.push_back("asymmetric a2 at a tube point");
                }
            }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Builtins

namespace {

Evaluator constant(cplx c) {
    return [c](const CVec&) { return c; };
}

CoefficientField skeleton(int n, const std::string& name, double nu) {
    CoefficientField f;
    f.n = n;
    f.name = name;
    f.nu = nu;
    f.a2.assign(n, std::vector<Evaluator>(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) f.a2[j][k] = constant(j == k ? 1.0 : 0.0);
    f.a1.assign(n, constant(0.0));
    f.a0 = constant(0.0);
    f.metric_is_identity = true;
    f.first_order_vanishes = true;
    f.potential_vanishes = true;
    return f;
}

cplx holo_square(const CVec& z) { return (z.array() * z.array()).sum(); }

// sup over the tube of |exp(-z^2)| <x>^2 (componentwise tube, n axes).
double gaussian_tube_constant(int n, double nu) { return std::exp((n - 1) * nu * nu) / (1 - nu * nu); }

}  // namespace

CoefficientField flat(int n) {
    auto f = skeleton(n, n == 1 ? "flat" : "flat" + std::to_string(n) + "d", 0.9);
    f.sigma = 1.0;
    f.c0 = 1.0;
    return f;
}

CoefficientField conformal1d(double c, double nu) {
    auto f = skeleton(1, "conformal1d", nu);
    f.a2[0][0] = [c](const CVec& z) { return 1.0 + c / (1.0 + z[0] * z[0]); };
    f.metric_is_identity = false;
    f.sigma = 1.0;
    f.c0 = std::abs(c) / (1 - nu * nu);
    return f;
}

CoefficientField gauss_bump(double c, double nu) {
    auto f = skeleton(1, "gauss-bump", nu);
    f.a2[0][0] = [c](const CVec& z) { return 1.0 + c * std::exp(-z[0] * z[0]); };
    f.metric_is_identity = false;
    f.sigma = 1.0;
    f.c0 = std::abs(c) * gaussian_tube_constant(1, nu);
    return f;
}

CoefficientField potential_only(double c, double nu) {
    auto f = skeleton(1, "potential-only", nu);
    f.a0 = [c](const CVec& z) { return c / (1.0 + z[0] * z[0]); };
    f.potential_vanishes = false;
    f.sigma = 1.0;
    f.c0 = std::abs(c) / (1 - nu * nu);
    return f;
}

CoefficientField conformal2d_well(double c, double nu) {
    if (!(c > 0 && c < 1)) throw std::invalid_argument("conformal2d-well needs 0 < c < 1");
    auto f = skeleton(2, "conformal2d-well", nu);
    f.a2[0][0] = f.a2[1][1] = [c](const CVec& z) { return 1.0 - c * std::exp(-holo_square(z)); };
    f.metric_is_identity = false;
    f.sigma = 1.0;
    f.c0 = c * gaussian_tube_constant(2, nu);
    return f;
}

CoefficientField trapping2d_well(double c) {
    if (!(c > 0 && c < 1)) throw std::invalid_argument("trapping2d-well needs 0 < c < 1");
    auto f = skeleton(2, "trapping2d-well", 0.3);
    f.a2[0][0] = f.a2[1][1] = [c](const CVec& z) {
        const cplx r2 = holo_square(z);
        return 1.0 - c * std::exp(-r2 * r2);
    };
    f.metric_is_identity = false;
    f.sigma = 1.0;
    // Numerical tube supremum of |exp(-(z.z)^2)| <x>^2 is 4.0671 (attained at a tube corner).
    f.c0 = 4.07 * c;
    return f;
}

const std::map<std::string, CoefficientField>& builtin_fields() {
    static const std::map<std::string, CoefficientField> registry = [] {
        std::map<std::string, CoefficientField> m;
        for (auto f : {flat(1), flat(2), conformal1d(), gauss_bump(), potential_only(), conformal2d_well(),
                       trapping2d_well()})
            m.emplace(f.name, std::move(f));
        return m;
    }();
    return registry;
}

std::optional<CoefficientField> make_builtin(const std::string& name, std::optional<double> c) {
    if (!c) {
        const auto& reg = builtin_fields();
        auto it = reg.find(name);
        if (it == reg.end()) return std::nullopt;
        return it->second;
    }
    if (name == "flat") return flat(1);
    if (name == "flat2d") return flat(2);
    if (name == "conformal1d") return conformal1d(*c);
    if (name == "gauss-bump") return gauss_bump(*c);
    if (name == "potential-only") return potential_only(*c);
    if (name == "conformal2d-well") return conformal2d_well(*c);
    if (name == "trapping2d-well") return trapping2d_well(*c);
    return std::nullopt;
}

}  // namespace wavefront::coeffs
