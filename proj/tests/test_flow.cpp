#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wavefront/flow.hpp"

using namespace wavefront;
using namespace wavefront::flow;

namespace {

PhasePoint pp(double x, double xi) { return {RVec::Constant(1, x), RVec::Constant(1, xi)}; }

// Frozen from oracle::conformal_x_plus(); recomputed in the first test case.
constexpr double kConformalXPlus = 0.5990701173677961;

}  // namespace

TEST_CASE("oracle constants") {
    CHECK(std::abs(oracle::conformal_x_plus() - kConformalXPlus) < 1e-14);
}

TEST_CASE("straight lines in the flat field") {
    const auto tr = integrate_hamilton(coeffs::flat(), pp(0.0, 1.0), 3.0, 1e-12);
    REQUIRE(tr.ok);
    CHECK(tr.states.back().x[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(tr.states.back().xi[0] == 1.0);
    CHECK(tr.times.back() == 3.0);
}

TEST_CASE("zero time is the identity") {
    const auto tr = integrate_hamilton(coeffs::conformal1d(), pp(0.3, -0.7), 0.0, 1e-10);
    REQUIRE(tr.times.size() == 1);
    CHECK(tr.states[0].x[0] == 0.3);
    CHECK(tr.states[0].xi[0] == -0.7);
}

TEST_CASE("conformal flow against RK4 step halving") {
    const auto field = coeffs::conformal1d();
    const auto tr = integrate_hamilton(field, pp(0.0, 1.0), 1.0, 1e-12);
    REQUIRE(tr.ok);
    const auto ref = oracle::conformal_flow_rk4(0.0, 1.0, 1.0, 2000);
    CHECK(std::abs(tr.states.back().x[0] - ref[0]) < 1e-9);
    CHECK(std::abs(tr.states.back().xi[0] - ref[1]) < 1e-9);
    for (double e : tr.energies) CHECK(std::abs(e - 1.0) < 1e-10);
}

TEST_CASE("energy ledger and time reversal") {
    const auto field = coeffs::conformal1d();
    for (double t : {-50.0, 50.0}) {
        const auto tr = integrate_hamilton(field, pp(0.5, 1.3), t, 1e-10);
        REQUIRE(tr.ok);
        CHECK(tr.max_drift <= 1e-10);
        const auto back = integrate_hamilton(field, tr.states.back(), -t, 1e-10);
        CHECK(std::abs(back.states.back().x[0] - 0.5) < 1e-9);
        CHECK(std::abs(back.states.back().xi[0] - 1.3) < 1e-9);
    }
    const auto well = coeffs::conformal2d_well();
    PhasePoint p{RVec::Zero(2), RVec::Zero(2)};
    p.x << 0.7, -0.2;
    p.xi << 0.1, 0.9;
    const auto tr = integrate_hamilton(well, p, 20.0, 1e-10);
    CHECK(tr.ok);
    CHECK(tr.max_drift <= 1e-10);
}

TEST_CASE("flat field never traps") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    const auto f2 = coeffs::flat(2);
    for (int i = 0; i < 100; ++i) {
        PhasePoint p{RVec(2), RVec(2)};
        p.x << 10 * g(rng), 10 * g(rng);
        p.xi << g(rng), g(rng);
        CHECK(classify_forward_nontrapping(f2, p) == Trapping::nontrapping);
    }
    CHECK_THROWS_AS(classify_forward_nontrapping(coeffs::flat(), pp(0, 0)), std::invalid_argument);
}

TEST_CASE("conformal1d escapes in both directions") {
    const auto field = coeffs::conformal1d();
    CHECK(classify_forward_nontrapping(field, pp(0.0, 1.0)) == Trapping::nontrapping);
    CHECK(classify_nontrapping(field, pp(0.0, 1.0), Direction::backward) == Trapping::nontrapping);
}

TEST_CASE("bounded orbit of the trapping well is never called nontrapping") {
    const auto well = coeffs::trapping2d_well();
    // Oracle: a 10x longer integration stays bounded.
    PhasePoint p{RVec(2), RVec(2)};
    p.x << 0.9, 0.0;
    p.xi << 0.0, 0.55;
    const auto longrun = integrate_hamilton(well, p, 10000.0, 1e-8);
    double rmax = 0;
    for (const auto& s : longrun.states) rmax = std::max(rmax, s.x.norm());
    REQUIRE(rmax < 5.0);
    CHECK(classify_forward_nontrapping(well, p) != Trapping::nontrapping);

    // conformal2d-well itself: radial direction escapes
    PhasePoint q{RVec::Zero(2), RVec::Zero(2)};
    q.xi << 1.0, 0.0;
    CHECK(classify_forward_nontrapping(coeffs::conformal2d_well(), q) == Trapping::nontrapping);
}

TEST_CASE("wave operator") {
    SUBCASE("flat is the identity") {
        const auto w = wave_operator(coeffs::flat(), pp(0.4, -1.2), Direction::forward, 1e-10);
        CHECK(w.converged);
        CHECK(std::abs(w.x_plus[0] - 0.4) < 1e-12);
        CHECK(std::abs(w.xi_plus[0] + 1.2) < 1e-12);
    }
    SUBCASE("conformal1d closed forms") {
        const auto field = coeffs::conformal1d();
        const auto w = wave_operator(field, pp(0.0, 1.0), Direction::forward, 1e-8);
        REQUIRE(w.converged);
        CHECK(std::abs(w.xi_plus[0] - std::sqrt(2.0)) < 1e-8);
        CHECK(std::abs(w.x_plus[0] - kConformalXPlus) < 1e-7);
        const auto w2 = wave_operator(field, pp(0.0, 2.5), Direction::forward, 1e-8);
        CHECK(std::abs(w2.x_plus[0] - kConformalXPlus) < 1e-7);
        const auto wb = wave_operator(field, pp(0.0, 1.0), Direction::backward, 1e-8);
        CHECK(std::abs(wb.x_plus[0] + kConformalXPlus) < 1e-7);
        CHECK(std::abs(wb.xi_plus[0] - std::sqrt(2.0)) < 1e-8);
    }
    SUBCASE("parity") {
        const auto field = coeffs::conformal1d();
        const auto a = wave_operator(field, pp(0.8, 0.9), Direction::forward, 1e-9);
        const auto b = wave_operator(field, pp(-0.8, -0.9), Direction::forward, 1e-9);
        CHECK(std::abs(a.x_plus[0] + b.x_plus[0]) < 1e-8);
        CHECK(std::abs(a.xi_plus[0] + b.xi_plus[0]) < 1e-9);
    }
    SUBCASE("free asymptote is approached monotonically") {
        const auto field = coeffs::conformal1d();
        const auto w = wave_operator(field, pp(0.0, 1.0), Direction::forward, 1e-10);
        std::vector<double> gaps;
        for (double T : {64.0, 128.0, 256.0, 512.0}) {
            const auto seg = integrate_hamilton(field, pp(0.0, 1.0), T, 1e-10);
            gaps.push_back(std::abs(seg.states.back().x[0] - (w.x_plus[0] + T * w.xi_plus[0])));
        }
        for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
    }
}

TEST_CASE("inverse wave operator") {
    const auto field = coeffs::conformal1d();
    const auto inv = inverse_wave_operator(field, pp(kConformalXPlus + 1.0, std::sqrt(2.0)), Direction::forward, 1e-8);
    REQUIRE(inv.converged);
    const auto w = wave_operator(field, inv.point, Direction::forward, 1e-10);
    CHECK(std::abs(w.x_plus[0] - kConformalXPlus - 1.0) < 1e-7);
    CHECK(std::abs(w.xi_plus[0] - std::sqrt(2.0)) < 1e-7);
}

TEST_CASE("trajectory CSV") {
    const auto tr = integrate_hamilton(coeffs::flat(), pp(0.0, 1.0), 1.0, 1e-10);
    std::ostringstream os;
    write_trajectory_csv(os, tr, "s0");
    CHECK(os.str().rfind("label,t,y1,eta1,energy\ns0,0,0,1,0.5\n", 0) == 0);
}
