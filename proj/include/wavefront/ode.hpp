#pragma once

// Embedded Runge-Kutta-Fehlberg 7(8) with adaptive step control.
// State is any Eigen column vector (real or complex).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace wavefront::ode {

enum class Status { ok, step_underflow, stopped, max_steps, nonfinite };

struct Options {
    double rtol = 1e-12;
    double atol = 1e-14;
    double h0 = 1e-2;
    double hmax = std::numeric_limits<double>::infinity();
    double hmin = 1e-14;
    long max_steps = 5'000'000;
};

template <class State>
struct Result {
    Status status = Status::ok;
    double t = 0.0;
    State y;
    double h_next = 0.0;  // suggested size for a continuation
    long accepted = 0;
    long rejected = 0;
};

namespace detail {

struct Rkf78 {
    static constexpr int S = 13;
    static constexpr std::array<double, S> c{0.0, 2.0 / 27, 1.0 / 9, 1.0 / 6, 5.0 / 12, 0.5, 5.0 / 6,
                                             1.0 / 6, 2.0 / 3, 1.0 / 3, 1.0, 0.0, 1.0};
    static constexpr double a[S][S - 1] = {
        {},
        {2.0 / 27},
        {1.0 / 36, 1.0 / 12},
        {1.0 / 24, 0, 1.0 / 8},
        {5.0 / 12, 0, -25.0 / 16, 25.0 / 16},
        {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5},
        {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54},
        {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900},
        {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0},
        {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60, 17.0 / 6, -1.0 / 12},
        {2383.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -301.0 / 82, 2133.0 / 4100, 45.0 / 82,
         45.0 / 164, 18.0 / 41},
        {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41, 6.0 / 41, 0},
        {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82, 2193.0 / 4100, 51.0 / 82,
         33.0 / 164, 12.0 / 41, 0, 1.0},
    };
    // 8th-order weights; the 7th-order solution differs by `e` below.
    static constexpr std::array<double, S> b{0, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35,
                                             9.0 / 280, 9.0 / 280, 0, 41.0 / 840, 41.0 / 840};
    static constexpr std::array<double, S> e{-41.0 / 840, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                             -41.0 / 840, 41.0 / 840, 41.0 / 840};
};

}  // namespace detail

/// Integrate y' = f(t, y) from t0 to t1 (either direction).
/// `monitor(t, y)` is called after every accepted step and returns false to stop.
template <class State, class Rhs, class Monitor>
Result<State> integrate(Rhs&& f, double t0, const State& y0, double t1, const Options& opt,
                        Monitor&& monitor) {
    using T = detail::Rkf78;
    Result<State> res;
    res.t = t0;
    res.y = y0;
    if (t1 == t0) return res;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    double h = std::min({std::abs(opt.h0), opt.hmax, std::abs(t1 - t0)});
    std::array<State, T::S> k;
    State ytmp(y0.size()), ynew(y0.size()), err(y0.size());

    while (dir * (t1 - res.t) > 0) {
        if (res.accepted + res.rejected >= opt.max_steps) {
            res.status = Status::max_steps;
            return res;
        }
        bool last = false;
        if (h >= std::abs(t1 - res.t)) {
            h = std::abs(t1 - res.t);
            last = true;
        }
        const double hs = dir * h;
        for (int s = 0; s < T::S; ++s) {
            ytmp = res.y;
            for (int j = 0; j < s; ++j)
                if (T::a[s][j] != 0.0) ytmp += (hs * T::a[s][j]) * k[j];
            k[s] = f(res.t + T::c[s] * hs, ytmp);
        }
        ynew = res.y;
        err.setZero();
        for (int s = 0; s < T::S; ++s) {
            if (T::b[s] != 0.0) ynew += (hs * T::b[s]) * k[s];
            if (T::e[s] != 0.0) err += (hs * T::e[s]) * k[s];
        }
        double en = 0.0;
        bool finite = true;
        for (Eigen::Index i = 0; i < ynew.size(); ++i) {
            const double scale = opt.atol + opt.rtol * std::max(std::abs(res.y[i]), std::abs(ynew[i]));
            const double r = std::abs(err[i]) / scale;
            if (!std::isfinite(r)) finite = false;
            en = std::max(en, r);
        }
        if (!finite) {
            ++res.rejected;
            h *= 0.25;
            if (h < opt.hmin) {
                res.status = Status::nonfinite;
                return res;
            }
            continue;
        }
        if (en <= 1.0) {
            res.t = last ? t1 : res.t + hs;
            res.y = ynew;
            ++res.accepted;
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -1.0 / 8), 0.2, 5.0);
            if (!last || res.h_next == 0.0) res.h_next = std::min(h * fac, opt.hmax);
            if (!monitor(res.t, res.y)) {
                res.status = Status::stopped;
                return res;
            }
            if (!last) h = res.h_next;
        } else {
            ++res.rejected;
            h *= std::clamp(0.9 * std::pow(en, -1.0 / 8), 0.1, 0.9);
            if (h < opt.hmin) {
                res.status = Status::step_underflow;
                return res;
            }
        }
    }
    return res;
}

template <class State, class Rhs>
Result<State> integrate(Rhs&& f, double t0, const State& y0, double t1, const Options& opt) {
    return integrate(std::forward<Rhs>(f), t0, y0, t1, opt, [](double, const State&) { return true; });
}

}  // namespace wavefront::ode
