#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wavefront/expression.hpp"
#include "wavefront/schrod.hpp"

using namespace wavefront;
using namespace wavefront::schrod;

namespace {

GridFunction gauss(double L, int N, double c = 0.0, double s = 1.0) {
    return GridFunction::sample(1, L, N, [=](const RVec& x) {
        const double d = (x[0] - c) / s;
        return cplx(std::exp(-0.5 * d * d));
    });
}

cplx inner(const GridFunction& a, const GridFunction& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
    return s * std::pow(a.dx(), a.n);
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

GridFunction random_smooth(int n, double L, int N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> c(8);
    for (auto& v : c) v = g(rng);
    return GridFunction::sample(n, L, N, [&](const RVec& x) {
        const double r2 = x.squaredNorm();
        return std::exp(-0.2 * r2) * cplx(c[0] + c[1] * x[0] + c[2] * std::sin(3 * x[0]), c[3] + c[4] * std::cos(x[n - 1]));
    });
}

coeffs::CoefficientField with_first_order() {
    auto f = coeffs::conformal1d();
    f.name = "drift";
    f.a1[0] = coeffs::parse_expression("0.3/(1+x^2)", 1);
    f.a0 = coeffs::parse_expression("0.5*exp(-x^2)", 1);
    f.first_order_vanishes = false;
    f.potential_vanishes = false;
    return f;
}

}  // namespace

TEST_CASE("wavenumbers and spectral derivative") {
    CHECK(wavenumber(0, 8, oracle::pi) == 0.0);
    CHECK(wavenumber(3, 8, oracle::pi) == 3.0);
    CHECK(wavenumber(4, 8, oracle::pi) == -4.0);
    CHECK(wavenumber(7, 8, oracle::pi) == -1.0);
    const auto u = GridFunction::sample(1, oracle::pi, 64, [](const RVec& x) { return cplx(std::sin(3 * x[0])); });
    const auto d = derivative(u, 0);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(d.values[i] - cplx(0, -3) * std::cos(3 * u.coord(i))) < 1e-12);
}

TEST_CASE("free propagation") {
    SUBCASE("zero time") {
        const auto u = gauss(10, 256);
        CHECK(max_diff(free_propagate(u, 0.0).u_t, u) == 0.0);
    }
    SUBCASE("plane wave eigenfunction") {
        const double L = 10.0;
        const int m = 7;
        const double k = m * oracle::pi / L;
        const auto u = GridFunction::sample(1, L, 128, [&](const RVec& x) { return std::exp(cplx(0, k * x[0])); });
        const auto r = free_propagate(u, 1.3);
        const cplx phase = std::polar(1.0, -1.3 * k * k / 2);
        for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(r.u_t.values[i] - phase * u.values[i]) < 1e-13);
    }
    SUBCASE("Gaussian closed form") {
        const double L = 20 * oracle::pi;
        const auto r = free_propagate(gauss(L, 4096), 1.0);
        double err = 0.0;
        for (int i = 0; i < 4096; ++i) err = std::max(err, std::abs(r.u_t.values[i] - oracle::free_gaussian(r.u_t.coord(i), 1.0)));
        CHECK(err < 1e-8);
        CHECK(r.norm_drift <= 1e-12);
    }
}

TEST_CASE("discrete Hamiltonian is symmetric") {
    std::vector<std::pair<coeffs::CoefficientField, int>> cases{
        {coeffs::conformal1d(), 256}, {coeffs::potential_only(), 256}, {with_first_order(), 256},
        {coeffs::conformal2d_well(), 32}};
    for (const auto& [f, N] : cases) {
        CAPTURE(f.name);
        const DiscreteHamiltonian H(f, f.n, 8.0, N);
        const auto u = random_smooth(f.n, 8.0, N, 1), v = random_smooth(f.n, 8.0, N, 2);
        const cplx a = inner(H.apply(u), v), b = inner(u, H.apply(v));
        CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("flat Hamiltonian is the free Laplacian") {
    const double L = 10.0;
    const auto u = gauss(L, 256, 1.0);
    const DiscreteHamiltonian H(coeffs::flat(), 1, L, 256);
    auto general = coeffs::flat();
    general.metric_is_identity = false;
    const DiscreteHamiltonian Hg(general, 1, L, 256);
    CHECK(max_diff(H.apply(u), Hg.apply(u)) < 1e-12);
}

TEST_CASE("Krylov propagation") {
    const double L = 20.0;
    const int N = 1024;
    const auto u0 = gauss(L, N, -1.0);
    SUBCASE("flat reduction") {
        const DiscreteHamiltonian H(coeffs::flat(), 1, L, N);
        const auto r = propagate(H, u0, 1.0, 1e-10);
        REQUIRE(r.ok);
        CHECK(max_diff(r.u_t, free_propagate(u0, 1.0).u_t) < 1e-8);
    }
    SUBCASE("unitarity and group law") {
        const DiscreteHamiltonian H(coeffs::conformal1d(), 1, L, N);
        const auto full = propagate(H, u0, 1.0, 1e-10);
        REQUIRE(full.ok);
        CHECK(full.norm_drift < 1e-8);
        const auto half = propagate(H, propagate(H, u0, 0.5, 1e-10).u_t, 0.5, 1e-10);
        CHECK(max_diff(full.u_t, half.u_t) < 5e-8);
        const auto split = propagate(H, propagate(H, u0, 0.3, 1e-10).u_t, 0.7, 1e-10);
        CHECK(max_diff(full.u_t, split.u_t) < 1e-9);
        const auto back = propagate(H, full.u_t, -1.0, 1e-10);
        CHECK(max_diff(back.u_t, u0) < 1e-8);
    }
    SUBCASE("first-order terms stay unitary") {
        const DiscreteHamiltonian H(with_first_order(), 1, L, N);
        CHECK(propagate(H, u0, 1.0, 1e-10).norm_drift < 1e-8);
    }
}

TEST_CASE("conjugated evolution") {
    const double L = 20.0;
    const int N = 512;
    const auto u0 = gauss(L, N, 0.5);
    SUBCASE("flat field gives back u0") {
        const DiscreteHamiltonian H(coeffs::flat(), 1, L, N);
        CHECK(max_diff(conjugated_evolution(H, u0, 0.7).u_t, u0) < 1e-9);
    }
    SUBCASE("zero time") {
        const DiscreteHamiltonian H(coeffs::conformal1d(), 1, L, N);
        CHECK(max_diff(conjugated_evolution(H, u0, 0.0).u_t, u0) == 0.0);
    }
    SUBCASE("i du/dt = L(t) u by central differences") {
        const auto field = coeffs::conformal1d();
        const DiscreteHamiltonian H(field, 1, L, N), H0(coeffs::flat(), 1, L, N);
        const double t = 0.5;
        const auto ut = conjugated_evolution(H, u0, t, 1e-13).u_t;
        // L(t) u = e^{itH0} (H - H0) e^{-itH0} u
        const auto w = free_propagate(ut, t).u_t;
        auto hw = H.apply(w);
        const auto h0w = H0.apply(w);
        for (std::size_t i = 0; i < hw.size(); ++i) hw.values[i] -= h0w.values[i];
        const auto Lu = free_propagate(hw, -t).u_t;
        std::vector<double> res;
        for (double dt : {0.02, 0.01}) {
            const auto up = conjugated_evolution(H, u0, t + dt, 1e-13).u_t;
            const auto um = conjugated_evolution(H, u0, t - dt, 1e-13).u_t;
            double m = 0.0;
            for (std::size_t i = 0; i < up.size(); ++i)
                m = std::max(m, std::abs(I * (up.values[i] - um.values[i]) / (2 * dt) - Lu.values[i]));
            res.push_back(m);
        }
        CHECK(res[0] < 1e-3);
        CHECK(res[1] / res[0] == doctest::Approx(0.25).epsilon(0.1));
    }
}

TEST_CASE("Weyl sandwich") {
    const double L = 12.0, h = 0.05, x0 = -0.5, xi0 = 1.0;
    const auto u = GridFunction::sample(1, L, 2048, [&](const RVec& x) {
        return std::exp(cplx(-(x[0] - x0) * (x[0] - x0) / (2 * h), xi0 * x[0] / h));
    });
    const auto one = weyl_linear_sandwich([](const RVec&) { return cplx(1.0); }, u, 2.0, h);
    CHECK(max_diff(one, u) < 1e-12);
    auto f = [](const RVec& x) { return cplx(1.0 / (1.0 + x[0] * x[0])); };
    const auto prod = weyl_linear_sandwich(f, u, 0.0, h);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(prod.values[i] == u.values[i] * f(RVec::Constant(1, u.coord(i))));
    for (double t : {0.5, 1.0, 2.0}) {
        const auto xu = weyl_linear_sandwich([](const RVec& x) { return cplx(x[0]); }, u, t, h);
        const cplx mean = inner(u, xu) / inner(u, u);
        CHECK(std::abs(mean - (x0 + t * xi0)) < 1e-10);
    }
}

TEST_CASE("spectral refinement") {
    const auto coarse = gauss(10.0, 256, 0.3, 0.7);
    const auto fine = refine(coarse, 8);
    const auto exact = gauss(10.0, 2048, 0.3, 0.7);
    CHECK(fine.N == 2048);
    CHECK(max_diff(fine, exact) < 1e-12);
    GridFunction c2 = GridFunction::sample(2, 6.0, 64, [](const RVec& x) { return cplx(std::exp(-x.squaredNorm())); });
    const auto f2 = refine(c2, 2);
    const auto e2 = GridFunction::sample(2, 6.0, 128, [](const RVec& x) { return cplx(std::exp(-x.squaredNorm())); });
    CHECK(max_diff(f2, e2) < 1e-10);
}

TEST_CASE("intertwining T D_x = D_z T") {
    const auto u = gauss(16.0, 4096, 0.2, 0.8);
    const auto du = derivative(u, 0);
    const double eps = 1e-3;
    for (cplx z : {cplx(0.1, -1.0), cplx(-0.5, 0.7)}) {
        const double h = 0.1;
        const CVec zc = CVec::Constant(1, z);
        const cplx lhs = fbi::fbi_transform(du, zc, h);
        const cplx dz = (fbi::fbi_transform(u, CVec::Constant(1, z + eps), h)
                         - fbi::fbi_transform(u, CVec::Constant(1, z - eps), h)) / (2 * eps);
        CHECK(std::abs(lhs - (-I) * dz) < 1e-5 * std::abs(lhs));
    }
}

TEST_CASE("binary snapshot round trip") {
    const auto u = random_smooth(1, 5.0, 64, 9);
    std::stringstream ss;
    write_binary(ss, u);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 24 + 64 * 16);
    CHECK(bytes[0] == 1);
    CHECK(bytes[8] == 64);
    const auto back = read_binary(ss);
    CHECK(back.N == 64);
    CHECK(back.L == 5.0);
    CHECK(max_diff(back, u) == 0.0);
    std::stringstream bad("xx");
    CHECK_THROWS(read_binary(bad));
}

TEST_CASE("containment monitor") {
    CHECK(boundary_mass(gauss(20.0, 512)) < kBoundaryWarn);
    CHECK(boundary_mass(gauss(20.0, 512, 19.0)) > kBoundaryWarn);
    std::ostringstream os;
    write_slice_csv(os, gauss(1.0, 4));
    CHECK(os.str().rfind("x,re,im\n-1,", 0) == 0);
}
