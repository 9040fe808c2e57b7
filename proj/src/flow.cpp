#include "wavefront/flow.hpp"

#include <cmath>
#include <ostream>

#include "wavefront/io_util.hpp"
#include "wavefront/ode.hpp"

namespace wavefront::flow {

using coeffs::CoefficientField;

namespace {

RVec pack(const PhasePoint& p) {
    RVec s(p.x.size() + p.xi.size());
    s << p.x, p.xi;
    return s;
}

PhasePoint unpack(const RVec& s) {
    const auto n = s.size() / 2;
    return {s.head(n), s.tail(n)};
}

double energy(const CoefficientField& f, const RVec& s) {
    const auto n = s.size() / 2;
    return coeffs::eval_symbol(f, s.head(n), s.tail(n));
}

void check_point(const CoefficientField& f, const PhasePoint& p) {
    if (p.x.size() != f.n || p.xi.size() != f.n)
        throw std::invalid_argument("phase point dimension does not match field " + f.name);
    if (!p.x.allFinite() || !p.xi.allFinite()) throw std::invalid_argument("phase point has non-finite entries");
}

ode::Options ode_options(double tol, int attempt) {
    ode::Options o;
    o.rtol = std::clamp(tol * 1e-2 * std::pow(1e-2, attempt), 1e-15, 1e-6);
    o.atol = o.rtol * 1e-2;
    o.h0 = 1e-2;
    return o;
}

std::string status_text(ode::Status s) {
    switch (s) {
        case ode::Status::ok: return "ok";
        case ode::Status::step_underflow: return "step size underflow";
        case ode::Status::stopped: return "stopped";
        case ode::Status::max_steps: return "step budget exhausted";
        case ode::Status::nonfinite: return "non-finite state";
    }
    return "?";
}

}  // namespace

RVec hamilton_rhs(const CoefficientField& field, const RVec& state) {
    const int n = field.n;
    RVec d(2 * n);
    const RVec eta = state.tail(n);
    if (field.metric_is_identity) {
        d << eta, RVec::Zero(n);
        return d;
    }
    const RVec y = state.head(n);
    d.head(n) = field.metric(y) * eta;
    const auto grad = field.metric_gradient(complexify(y));
    for (int l = 0; l < n; ++l) d[n + l] = -0.5 * eta.dot(grad[l].real() * eta);
    return d;
}

namespace {

// State (w, eta) with w = y - t eta, which stays O(1) along escaping rays, so
// relative error control on w is meaningful at large t.
RVec asymptotic_rhs(const CoefficientField& field, double t, const RVec& s) {
    const int n = field.n;
    RVec y = s.head(n) + t * s.tail(n);
    RVec yeta(2 * n);
    yeta << y, s.tail(n);
    const RVec d = hamilton_rhs(field, yeta);
    RVec out(2 * n);
    out.head(n) = d.head(n) - s.tail(n) - t * d.tail(n);
    out.tail(n) = d.tail(n);
    return out;
}

RVec to_physical(double t, const RVec& s) {
    const auto n = s.size() / 2;
    RVec out(2 * n);
    out << s.head(n) + t * s.tail(n), s.tail(n);
    return out;
}

}  // namespace

Trajectory integrate_hamilton(const CoefficientField& field, const PhasePoint& p0, double t_end, double tol,
                              const FlowOptions& opt) {
    check_point(field, p0);
    if (!(tol > 0)) throw std::invalid_argument("integrate_hamilton: tol must be positive");
    const RVec s0 = pack(p0);
    const double e0 = energy(field, s0);
    auto rhs = [&](double, const RVec& s) { return hamilton_rhs(field, s); };

    Trajectory tr;
    for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
        tr = Trajectory{};
        tr.energy_tol = tol;
        tr.times.push_back(0.0);
        tr.states.push_back(p0);
        tr.energies.push_back(e0);
        auto o = ode_options(tol, attempt);
        o.hmax = opt.hmax;
        auto res = ode::integrate(rhs, 0.0, s0, t_end, o, [&](double t, const RVec& s) {
            const double e = energy(field, s);
            tr.times.push_back(t);
            tr.states.push_back(unpack(s));
            tr.energies.push_back(e);
            tr.max_drift = std::max(tr.max_drift, std::abs(e - e0));
            return true;
        });
        if (res.status != ode::Status::ok) {
            tr.ok = false;
            tr.failure = "integration failed at t=" + num(res.t) + ": " + status_text(res.status);
            return tr;
        }
        if (tr.max_drift <= tol) return tr;
    }
    tr.ok = false;
    tr.failure = "energy drift " + num(tr.max_drift) + " exceeds tolerance " + num(tol);
    return tr;
}

std::string to_string(Trapping v) {
    switch (v) {
        case Trapping::nontrapping: return "nontrapping";
        case Trapping::trapped: return "trapped";
        case Trapping::undetermined: return "undetermined";
    }
    return "?";
}

std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

Trapping classify_nontrapping(const CoefficientField& field, const PhasePoint& p0, Direction dir,
                              const ClassifyOptions& opt) {
    check_point(field, p0);
    if (p0.xi.norm() == 0.0) throw std::invalid_argument("classify: xi0 must be nonzero");
    const int n = field.n;
    const double sign = dir == Direction::forward ? 1.0 : -1.0;
    auto rhs = [&](double, const RVec& s) { return hamilton_rhs(field, s); };

    bool escaped = false;
    int outward = 0, sign_changes = 0;
    double last_radial = 0.0, max_first = p0.x.norm(), max_second = 0.0;
    auto monitor = [&](double t, const RVec& s) {
        const RVec y = s.head(n);
        const RVec v = field.metric(y) * s.tail(n);
        const double radial = sign * y.dot(v);
        const double r = y.norm();
        if (last_radial != 0.0 && radial != 0.0 && (radial > 0) != (last_radial > 0)) ++sign_changes;
        if (radial != 0.0) last_radial = radial;
        double& half_max = std::abs(t) <= 0.5 * opt.horizon ? max_first : max_second;
        half_max = std::max(half_max, r);
        const double far = field.c0 * std::pow(japanese(r), -1.0 - field.sigma);
        if (r >= opt.escape_radius && radial > 0 && far < opt.far_field_margin) {
            if (++outward >= opt.outward_checkpoints) {
                escaped = true;
                return false;
            }
        } else {
            outward = 0;
        }
        return true;
    };
    auto o = ode_options(opt.tol, 0);
    o.hmax = 1.0;
    auto res = ode::integrate(rhs, 0.0, pack(p0), sign * opt.horizon, o, monitor);
    if (escaped) return Trapping::nontrapping;
    if (res.status != ode::Status::ok) return Trapping::undetermined;
    if (max_second <= max_first * (1 + 1e-6) && sign_changes >= 2) return Trapping::trapped;
    return Trapping::undetermined;
}

Trapping classify_forward_nontrapping(const CoefficientField& field, const PhasePoint& p0, double horizon,
                                      double escape_radius) {
    ClassifyOptions o;
    o.horizon = horizon;
    o.escape_radius = escape_radius;
    return classify_nontrapping(field, p0, Direction::forward, o);
}

WaveOperatorResult wave_operator(const CoefficientField& field, const PhasePoint& p0, Direction dir, double tol,
                                 const WaveOperatorOptions& opt) {
    check_point(field, p0);
    if (p0.xi.norm() == 0.0) throw std::invalid_argument("wave_operator: xi0 must be nonzero");
    const int n = field.n;
    const double sign = dir == Direction::forward ? 1.0 : -1.0;
    WaveOperatorResult out;
    out.direction = dir;

    auto rhs = [&](double t, const RVec& s) { return asymptotic_rhs(field, t, s); };
    const double e0 = energy(field, pack(p0));
    double drift = 0.0;
    auto monitor = [&](double t, const RVec& s) {
        drift = std::max(drift, std::abs(energy(field, to_physical(t, s)) - e0));
        return true;
    };
    auto o = ode_options(std::min(opt.energy_tol, tol), 1);

    // Richardson table over the doubling sequence; error ~ sum_m c_m T^{-m sigma}.
    std::vector<std::vector<RVec>> table;
    RVec state = pack(p0);
    double t = 0.0, h = o.h0;
    for (double T = opt.t0; T <= opt.max_horizon; T *= 2) {
        o.h0 = h;
        auto res = ode::integrate(rhs, t, state, sign * T, o, monitor);
        if (res.status != ode::Status::ok) {
            out.failure = "integration failed at t=" + num(res.t) + ": " + status_text(res.status);
            break;
        }
        t = res.t;
        state = res.y;
        h = res.h_next;

        const RVec est = state;
        out.horizons.push_back(T);
        out.raw_estimates.push_back(est);

        std::vector<RVec> row{est};
        const std::size_t k = table.size();
        const int levels = static_cast<int>(std::min<std::size_t>(k, opt.richardson_levels));
        for (int m = 1; m <= levels; ++m) {
            const double f = std::pow(2.0, m * field.sigma);
            row.push_back((f * row[m - 1] - table[k - 1][m - 1]) / (f - 1));
        }
        table.push_back(row);
        out.horizon = T;
        if (k >= 1) {
            const int m = std::min<int>(static_cast<int>(k) - 1, opt.richardson_levels);
            const RVec cur = table[k][m], prev = table[k - 1][m];
            out.residual = (cur - prev).cwiseAbs().maxCoeff();
            out.x_plus = cur.head(n);
            out.xi_plus = cur.tail(n);
            if (k >= 2 && out.residual < tol) {
                out.converged = true;
                break;
            }
        } else {
            out.x_plus = est.head(n);
            out.xi_plus = est.tail(n);
            out.residual = std::numeric_limits<double>::infinity();
        }
    }
    if (drift > opt.energy_tol) {
        out.converged = false;
        out.failure = "energy drift " + num(drift) + " exceeds " + num(opt.energy_tol);
    } else if (!out.converged && out.failure.empty()) {
        out.failure = "not converged within horizon " + num(out.horizon);
    }
    return out;
}

InverseResult inverse_wave_operator(const CoefficientField& field, const PhasePoint& asym, Direction dir,
                                    double tol, const WaveOperatorOptions& opt) {
    check_point(field, asym);
    const int n = field.n;
    const double sign = dir == Direction::forward ? 1.0 : -1.0;
    InverseResult out;
    auto rhs = [&](double t, const RVec& s) { return asymptotic_rhs(field, t, s); };
    auto o = ode_options(1e-10, 1);

    // Initial guess: flow the free asymptote at time sign*T back to time 0.
    const double T = 4 * opt.t0;
    auto res = ode::integrate(rhs, sign * T, pack(asym), 0.0, o);
    PhasePoint p = unpack(res.y);

    RVec target = pack(asym);
    auto forward_map = [&](const PhasePoint& q, bool& ok) {
        auto w = wave_operator(field, q, dir, tol * 1e-2, opt);
        ok = w.converged;
        RVec r(2 * n);
        r << w.x_plus, w.xi_plus;
        return r;
    };
    bool ok = true;
    RVec f = forward_map(p, ok) - target;
    for (int it = 0; it < 8 && ok; ++it) {
        out.residual = f.cwiseAbs().maxCoeff();
        if (out.residual < tol) {
            out.converged = true;
            break;
        }
        RMat J(2 * n, 2 * n);
        const double step = 1e-5;
        for (int c = 0; c < 2 * n; ++c) {
            RVec sp = pack(p), sm = pack(p);
            sp[c] += step;
            sm[c] -= step;
            bool okp = true, okm = true;
            J.col(c) = (forward_map(unpack(sp), okp) - forward_map(unpack(sm), okm)) / (2 * step);
            ok = ok && okp && okm;
        }
        if (!ok) break;
        const RVec delta = J.partialPivLu().solve(f);
        p = unpack(pack(p) - delta);
        f = forward_map(p, ok) - target;
    }
    if (ok && !out.converged) {
        out.residual = f.cwiseAbs().maxCoeff();
        out.converged = out.residual < tol;
    }
    out.point = p;
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& label) {
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().x.size());
    os << "label,t";
    for (int j = 1; j <= n; ++j) os << ",y" << j;
    for (int j = 1; j <= n; ++j) os << ",eta" << j;
    os << ",energy\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << label << ',' << num(traj.times[i]);
        for (int j = 0; j < n; ++j) os << ',' << num(traj.states[i].x[j]);
        for (int j = 0; j < n; ++j) os << ',' << num(traj.states[i].xi[j]);
        os << ',' << num(traj.energies[i]) << '\n';
    }
}

}  // namespace wavefront::flow
