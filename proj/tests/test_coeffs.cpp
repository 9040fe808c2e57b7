#include "doctest.h"

#include <cmath>

#include "wavefront/coeffs.hpp"
#include "wavefront/expression.hpp"

using namespace wavefront;
using namespace wavefront::coeffs;

namespace {

RVec v1(double a) { return RVec::Constant(1, a); }
CVec c1(cplx a) { return CVec::Constant(1, a); }

}  // namespace

TEST_CASE("principal symbol") {
    CHECK(eval_symbol(flat(), v1(3.7), v1(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(eval_symbol(conformal1d(), v1(0.0), v1(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    for (const auto& [name, f] : builtin_fields()) CHECK(eval_symbol(f, RVec::Ones(f.n), RVec::Zero(f.n)) == 0.0);
    CHECK_THROWS_AS(eval_symbol(flat(), RVec::Zero(2), v1(1.0)), std::invalid_argument);
}

TEST_CASE("complex evaluation inside the tube") {
    const auto conf = conformal1d();
    CHECK(std::abs(eval_complex(conf, Selector::a2(0, 0), c1(cplx(0, 0.5))) - (1.0 + 1.0 / 0.75)) < 1e-14);
    CHECK(std::abs(eval_complex(flat(), Selector::a2(0, 0), c1(cplx(2, -1.5))) - 1.0) == 0.0);
    CHECK(std::abs(eval_complex(gauss_bump(), Selector::a2(0, 0), c1(1.0)) - (1.0 + 0.3 * std::exp(-1.0))) < 1e-15);
}

TEST_CASE("tube violation names the bound") {
    const auto conf = conformal1d();
    try {
        eval_complex(conf, Selector::a2(0, 0), c1(cplx(0, 0.95)));
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("Im z_0") != std::string::npos);
    }
}

TEST_CASE("real evaluations are real and match complex path") {
    const auto samples = default_sampling(1, 0.9, 7, 1000);
    for (const auto& [name, f] : builtin_fields()) {
        const auto s = default_sampling(f.n, f.nu, 7, 1000);
        for (const RVec& x : s.real_points) {
            const CVec z = complexify(x);
            for (int j = 0; j < f.n; ++j)
                for (int k = 0; k < f.n; ++k) {
                    const cplx v = eval_complex(f, Selector::a2(j, k), z);
                    CHECK(std::abs(v.imag()) <= 1e-14);
                    CHECK(std::abs(v.real() - f.value(Selector::a2(j, k), x)) <= 1e-14);
                }
        }
    }
    CHECK(samples.real_points.size() > 1000);
}

TEST_CASE("builtins satisfy their declared decay on rays and tube samples") {
    for (const auto& [name, f] : builtin_fields()) {
        CAPTURE(name);
        const auto rep = validate_assumption_a(f, default_sampling(f.n, f.nu, 11, 1000));
        CHECK(rep.passed());
        CHECK(rep.min_eigenvalue > 0.0);
        CHECK(rep.max_ratio <= 1.0 + 1e-9);
    }
}

TEST_CASE("flat validation has zero ratios") {
    const auto rep = validate_assumption_a(flat(2), default_sampling(2, 0.9, 3));
    CHECK(rep.passed());
    CHECK(rep.max_ratio == 0.0);
}

TEST_CASE("conformal1d with C0 = 1 passes on real samples") {
    auto f = conformal1d(1.0);
    f.c0 = 1.0;
    SamplingSpec real_only = default_sampling(1, f.nu, 5);
    real_only.tube_points.clear();
    const auto rep = validate_assumption_a(f, real_only);
    CHECK(rep.passed());
    CHECK(rep.max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("slow decay is flagged") {
    auto f = flat(1);
    f.name = "slow";
    f.a2[0][0] = [](const CVec& z) { return 1.0 + 1.0 / std::sqrt(1.0 + z[0] * z[0]); };
    f.metric_is_identity = false;
    SamplingSpec s;
    s.real_points.push_back(v1(2.0));
    const auto rep = validate_assumption_a(f, s);
    CHECK_FALSE(rep.passed());
    CHECK(rep.decay.front().ratio == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("asymmetric and indefinite fields are reported, not thrown") {
    auto f = flat(2);
    f.a2[0][1] = [](const CVec&) { return cplx(0.1); };
    f.a2[1][1] = [](const CVec&) { return cplx(-1.0); };
    f.metric_is_identity = false;
    const auto rep = validate_assumption_a(f, default_sampling(2, 0.5, 1, 10));
    CHECK(rep.symmetry_violations > 0);
    CHECK(rep.definiteness_violations > 0);
}

TEST_CASE("registry") {
    const auto& reg = builtin_fields();
    for (const char* name : {"flat", "conformal1d", "gauss-bump", "potential-only", "conformal2d-well"})
        CHECK(reg.count(name) == 1);
    const auto conf = reg.at("conformal1d");
    CHECK(conf.value(Selector::a2(0, 0), v1(0.0)) == 2.0);
    CHECK(conf.value(Selector::a2(0, 0), v1(1e8)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(make_builtin("no-such-field").has_value());
    CHECK(make_builtin("gauss-bump", 0.5)->value(Selector::a2(0, 0), v1(0.0)) == doctest::Approx(1.5));
}

TEST_CASE("Cauchy derivative against hand derivative") {
    const auto conf = conformal1d();
    for (double x : {-3.0, -0.4, 0.0, 0.7, 5.0}) {
        const double exact = -2.0 * x / ((1 + x * x) * (1 + x * x));
        CHECK(std::abs(conf.partial(Selector::a2(0, 0), c1(x), 0) - exact) < 1e-13);
    }
    const cplx z(0.3, -0.6);
    const cplx exact = -2.0 * z / ((1.0 + z * z) * (1.0 + z * z));
    CHECK(std::abs(conf.partial(Selector::a2(0, 0), c1(z), 0) - exact) < 1e-10);

    const auto well = conformal2d_well();
    CVec w(2);
    w << cplx(0.4, 0.1), cplx(-0.2, 0.3);
    const cplx r2 = w[0] * w[0] + w[1] * w[1];
    const auto g = well.metric_gradient(w);
    CHECK(std::abs(g[1](0, 0) - 0.5 * 2.0 * w[1] * std::exp(-r2)) < 1e-12);
    CHECK(std::abs(g[0](0, 1)) < 1e-14);
}

TEST_CASE("expression grammar") {
    auto e = parse_expression("1 + 0.5/(1+x^2)", 1);
    CHECK(std::abs(e(c1(cplx(0, 0.5))) - (1.0 + 0.5 / 0.75)) < 1e-15);
    auto g = parse_expression("1 - 0.3*exp(-r2)", 2);
    CVec z(2);
    z << 1.0, 2.0;
    CHECK(std::abs(g(z) - (1.0 - 0.3 * std::exp(-5.0))) < 1e-15);
    auto h = parse_expression("-x2*x1 + 2^3", 2);
    CHECK(std::abs(h(z) - 6.0) < 1e-15);
    CHECK_THROWS_AS(parse_expression("1 + y", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("x^0.5", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("x3", 2), ParseError);
    CHECK_THROWS_AS(parse_expression("(1 + x", 1), ParseError);
}
