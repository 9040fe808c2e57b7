#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wavefront/fbi.hpp"

using namespace wavefront;
using namespace wavefront::fbi;

namespace {

GridFunction gaussian(double L = 16.0, int N = 8192) {
    return GridFunction::sample(1, L, N, [](const RVec& x) { return cplx(std::exp(-0.5 * x[0] * x[0])); });
}

GridFunction jump(double L = 16.0, int N = 8192) {
    return GridFunction::sample(1, L, N, [](const RVec& x) {
        const double g = std::exp(-0.5 * x[0] * x[0]);
        return cplx(x[0] > 0 ? g : (x[0] == 0 ? 0.5 : 0.0));
    });
}

FbiPoint at(double x, double xi) { return {RVec::Constant(1, x), RVec::Constant(1, xi)}; }
CVec c1(cplx z) { return CVec::Constant(1, z); }

}  // namespace

TEST_CASE("grid function basics") {
    CHECK_THROWS_AS(GridFunction(1, 1.0, 100), std::invalid_argument);
    const auto g = gaussian();
    CHECK(g.dx() == doctest::Approx(32.0 / 8192));
    CHECK(g.coord(0) == -16.0);
    CHECK(g.l2_norm() == doctest::Approx(std::pow(oracle::pi, 0.25)).epsilon(1e-13));
}

TEST_CASE("transform of zero") {
    GridFunction z(1, 10.0, 1024);
    CHECK(fbi_transform(z, c1(cplx(0.3, -1.0)), 0.1) == cplx(0.0));
    CHECK(weighted_fbi_norm(z, Omega{c1(cplx(0, -1)), 0.1}, 0.05) == 0.0);
}

TEST_CASE("Gaussian closed form") {
    const auto g = gaussian();
    const cplx z(1.0, -1.0);
    const cplx ref = oracle::gaussian_fbi(z, 0.1);
    CHECK(std::abs(fbi_transform(g, c1(z), 0.1) - ref) < 1e-8 * std::abs(ref));

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> re(-1.5, 1.5), im(-0.8, 0.8), hh(0.025, 0.2);
    for (int i = 0; i < 20; ++i) {
        const cplx zz(re(rng), im(rng));
        const double h = hh(rng);
        const cplx r = oracle::gaussian_fbi(zz, h);
        CHECK(std::abs(fbi_transform(g, c1(zz), h) - r) < 1e-7 * std::abs(r));
    }
}

TEST_CASE("plane wave under a flat window") {
    const double omega = 2.0;
    auto taper = [](double x) {
        const double a = std::abs(x);
        if (a <= 10.0) return 1.0;
        if (a >= 14.0) return 0.0;
        const double s = (a - 10.0) / 4.0;
        return 0.5 * (1.0 + std::cos(oracle::pi * s));
    };
    const auto u = GridFunction::sample(1, 20.0, 16384, [&](const RVec& x) {
        return std::exp(cplx(0, omega * x[0])) * taper(x[0]);
    });
    for (cplx z : {cplx(0.0, -1.0), cplx(1.0, 0.5), cplx(-2.0, -2.0)}) {
        const double h = 0.1;
        const cplx ref = std::sqrt(2 * oracle::pi * h) * std::exp(I * omega * z - omega * omega * h / 2);
        CHECK(std::abs(fbi_transform(u, c1(z), h) - ref) < 1e-6 * std::abs(ref));
    }
}

TEST_CASE("containment and argument errors") {
    const auto g = gaussian(4.0, 1024);
    CHECK_THROWS_AS(fbi_transform(g, c1(cplx(3.0, -1.0)), 0.2), ContainmentError);
    CHECK_THROWS_AS(fbi_transform(g, c1(cplx(0.0, -1.0)), 0.0), std::invalid_argument);
    CHECK_NOTHROW(fbi_transform(g, c1(cplx(0.0, -1.0)), 0.2));
}

TEST_CASE("conjugation symmetry") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    auto u = GridFunction::sample(1, 16.0, 4096, [&](const RVec& x) {
        return cplx(std::exp(-x[0] * x[0]) * (1 + x[0]), std::sin(x[0]) * std::exp(-0.3 * x[0] * x[0]));
    });
    auto ubar = u;
    for (auto& v : ubar.values) v = std::conj(v);
    for (int i = 0; i < 10; ++i) {
        const cplx z(nd(rng), nd(rng));
        const cplx a = fbi_transform(ubar, c1(std::conj(z)), 0.1), b = std::conj(fbi_transform(u, c1(z), 0.1));
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("shrinking Omega never increases the norm") {
    const auto j = jump();
    const Omega big{c1(cplx(0.0, -1.0)), 0.2};
    double prev = weighted_fbi_norm(j, big, 0.05, 0.05);
    for (double r : {0.15, 0.1, 0.05, 0.0}) {
        const double cur = weighted_fbi_norm(j, Omega{big.z0, r}, 0.05, 0.05);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(omega_lattice(Omega{c1(0.0), 0.1}, 0.05).size() == 13);
}

TEST_CASE("weighted norm of the Gaussian against the closed form") {
    const auto g = gaussian();
    for (double h : {0.1, 0.05}) {
        const double sp = 0.05;
        double acc = 0.0;
        for (int i = -2; i <= 2; ++i)
            for (int k = -2; k <= 2; ++k) {
                if (i * i + k * k > 4) continue;
                const cplx z(i * sp, -1.0 + k * sp);
                acc += std::norm(oracle::gaussian_fbi(z, h) * std::exp(-0.5 * z.imag() * z.imag() / h));
            }
        const double ref = std::sqrt(acc * sp * sp);
        CHECK(weighted_fbi_norm(g, Omega{c1(cplx(0, -1)), 0.1}, h) == doctest::Approx(ref).epsilon(1e-7));
    }
}

TEST_CASE("decay calibration") {
    const auto h = default_h_grid();
    const auto eg = decay_rate_estimate(gaussian(), at(0, 1), h);
    CHECK(std::abs(eg.delta_hat - 0.5) < 0.02);
    CHECK(eg.r2 >= 0.999);
    CHECK(eg.verdict == Verdict::regular);

    const auto ej = decay_rate_estimate(jump(), at(0, 1), h);
    CHECK(std::abs(ej.delta_hat) < 0.01);
    CHECK(ej.verdict == Verdict::singular);

    const auto ea = decay_rate_estimate(jump(), at(2, 1), h);
    CHECK(ea.delta_hat > 0.1);
    CHECK(ea.verdict == Verdict::regular);

    CHECK_THROWS_AS(decay_rate_estimate(gaussian(), at(0, 1), {0.2, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(decay_rate_estimate(gaussian(), at(0, 0), h), std::invalid_argument);
}

TEST_CASE("degenerate data") {
    GridFunction z(1, 16.0, 8192);
    const auto e = decay_rate_estimate(z, at(0, 1), default_h_grid());
    CHECK(e.verdict == Verdict::undetermined);
    CHECK(e.flag.find("degenerate") != std::string::npos);
    CHECK(std::isfinite(e.delta_hat));
}

TEST_CASE("wavefront indicator") {
    SUBCASE("Gaussian is regular everywhere") {
        std::vector<FbiPoint> seeds;
        for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
            for (double xi : {-2.0, -1.0, 0.5, 1.0, 2.0}) seeds.push_back(at(x, xi));
        const auto rep = wavefront_indicator(gaussian(), seeds, default_h_grid());
        REQUIRE(rep.entries.size() == 25);
        for (const auto& e : rep.entries) CHECK(e.verdict() == Verdict::regular);
    }
    SUBCASE("flat function concentrates at x = 0") {
        const auto u = GridFunction::sample(1, 16.0, 8192, [](const RVec& x) {
            return cplx(x[0] > 0 ? std::exp(-1.0 / x[0] - 0.5 * x[0] * x[0]) : 0.0);
        });
        std::vector<FbiPoint> seeds;
        for (double x : {-1.0, 0.0, 1.0})
            for (double xi : {1.0, 1.5}) seeds.push_back(at(x, xi));
        const auto rep = wavefront_indicator(u, seeds, default_h_grid());
        for (double xi : {1.0, 1.5}) {
            double d0 = 0, dmin_other = 1e9;
            for (const auto& e : rep.entries) {
                if (e.seed.xi0[0] != xi) continue;
                REQUIRE(e.estimate);
                if (e.seed.x0[0] == 0.0) d0 = e.estimate->delta_hat;
                else dmin_other = std::min(dmin_other, e.estimate->delta_hat);
            }
            CHECK(d0 < dmin_other);
        }
    }
    SUBCASE("empty seed list") {
        CHECK(wavefront_indicator(gaussian(), {}, default_h_grid()).entries.empty());
    }
    SUBCASE("per-seed errors are recorded") {
        const auto rep = wavefront_indicator(gaussian(4.0, 1024), {at(3.5, 1.0), at(0, 1)}, default_h_grid());
        CHECK_FALSE(rep.entries[0].error.empty());
        CHECK(rep.entries[1].estimate.has_value());
    }
}

TEST_CASE("report serialisation") {
    const auto rep = wavefront_indicator(gaussian(), {at(0, 1)}, default_h_grid());
    std::ostringstream os;
    write_report_csv(os, rep);
    CHECK(os.str().rfind("x0,xi0,delta_hat,r2,verdict,flag\n0,1,", 0) == 0);
    const auto j = to_json(rep);
    CHECK(j["entries"][0]["verdict"] == "regular");
}
