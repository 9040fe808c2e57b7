#include "wavefront/microlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "wavefront/io_util.hpp"
#include "wavefront/ode.hpp"
#include "wavefront/schrod.hpp"

namespace wavefront::microlocal {

using coeffs::CoefficientField;

bool ComplexPhasePoint::on_real_base(double tol) const {
    if (z.size() != zeta.size()) return false;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (std::abs(zeta[j].imag()) > tol) return false;
        if (std::abs(zeta[j].real() + z[j].imag()) > tol) return false;
    }
    return true;
}

ComplexPhasePoint kappa(const RVec& x, const RVec& xi) {
    if (x.size() != xi.size()) throw std::invalid_argument("kappa: x and xi differ in dimension");
    ComplexPhasePoint p;
    p.z = complexify(x) - I * complexify(xi);
    p.zeta = complexify(xi);
    return p;
}

flow::PhasePoint kappa_inv(const ComplexPhasePoint& p) {
    if (!p.on_real_base())
        throw DomainError("kappa_inv: point is not on the real base (zeta must equal -Im z)");
    return {p.z.real(), p.zeta.real()};
}

ComplexPhasePoint kappa_inv_complex(const ComplexPhasePoint& p) { return {p.z + I * p.zeta, p.zeta}; }

BGradient b_gradient(const CoefficientField& field, double s, const CVec& z, const CVec& zeta) {
    const int n = field.n;
    if (z.size() != n || zeta.size() != n) throw std::invalid_argument("b: dimension mismatch");
    BGradient g{0.0, CVec::Zero(n), CVec::Zero(n)};
    if (field.metric_is_identity) return g;
    const CVec w = z + (I + s) * zeta;
    field.require_tube(w);
    const CMat A = field.metric(w) - CMat::Identity(n, n);
    const auto grad = field.metric_gradient(w);
    const CVec Az = A * zeta;
    g.b = 0.5 * dot(zeta, Az);
    for (int l = 0; l < n; ++l) g.grad_z[l] = 0.5 * dot(zeta, grad[l] * zeta);
    g.grad_zeta = Az + (I + s) * g.grad_z;
    return g;
}

cplx b_symbol(const CoefficientField& field, double s, const CVec& z, const CVec& zeta) {
    return b_gradient(field, s, z, zeta).b;
}

namespace {

ode::Options b_options(double tol) {
    ode::Options o;
    o.rtol = std::clamp(tol * 1e-2, 1e-14, 1e-6);
    o.atol = o.rtol;
    o.h0 = 1e-2;
    return o;
}

struct BFlow {
    CVec z, zeta;
    cplx action = 0.0;  // int (zeta . grad_zeta b - b)
};

// Complexified Hamilton system of b, with the action integrand appended.
BFlow flow_b(const CoefficientField& field, double s0, double s, const CVec& z, const CVec& zeta, double tol) {
    const int n = field.n;
    BFlow out{z, zeta, 0.0};
    if (s == s0 || field.metric_is_identity) return out;
    CVec st(2 * n + 1);
    st << z, zeta, cplx(0.0);
    double s_last = s0;
    auto rhs = [&](double t, const CVec& y) {
        s_last = t;
        const CVec zz = y.head(n), ze = y.segment(n, n);
        const auto g = b_gradient(field, t, zz, ze);
        CVec d(2 * n + 1);
        d << g.grad_zeta, -g.grad_z, dot(ze, g.grad_zeta) - g.b;
        return d;
    };
    ode::Result<CVec> res;
    try {
        res = ode::integrate(rhs, s0, st, s, b_options(tol));
    } catch (const DomainError& e) {
        throw DomainError(std::string("twisted flow left the tube near s=") + num(s_last) + ": " + e.what());
    }
    if (res.status != ode::Status::ok)
        throw std::runtime_error("twisted flow integration failed at s=" + num(res.t));
    out.z = res.y.head(n);
    out.zeta = res.y.segment(n, n);
    out.action = res.y[2 * n];
    return out;
}

ComplexPhasePoint compose(const CoefficientField& field, double s, const ComplexPhasePoint& start, double tol) {
    const auto p = kappa_inv(start);
    if (s == 0.0 || field.metric_is_identity) return start;
    flow::FlowOptions fo;
    fo.hmax = std::numeric_limits<double>::infinity();
    const auto tr = flow::integrate_hamilton(field, p, s, tol, fo);
    if (!tr.ok) throw std::runtime_error("twisted flow: " + tr.failure);
    const auto& e = tr.states.back();
    return kappa(e.x - s * e.xi, e.xi);
}

ComplexPhasePoint compose_inverse(const CoefficientField& field, double s, const ComplexPhasePoint& end, double tol) {
    const auto p = kappa_inv(end);
    if (s == 0.0 || field.metric_is_identity) return end;
    flow::FlowOptions fo;
    fo.hmax = std::numeric_limits<double>::infinity();
    const auto tr = flow::integrate_hamilton(field, {p.x + s * p.xi, p.xi}, -s, tol, fo);
    if (!tr.ok) throw std::runtime_error("inverse twisted flow: " + tr.failure);
    const auto& e = tr.states.back();
    return kappa(e.x, e.xi);
}

double inf_norm(const CVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Shot {
    CVec y;
    cplx psi = 0.0;
    CVec zeta_s;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::string failure;
};

// Solves z~(s; y, eta) = z for y by damped Newton with a finite-difference Jacobian.
Shot shoot(const CoefficientField& field, double s, const CVec& z, const CVec& eta, double tol, const CVec& y0,
           const GeneratingOptions& opt) {
    const int n = field.n;
    Shot sh;
    sh.y = y0;
    const double scale = std::max(1.0, inf_norm(z));
    const double target = std::max(tol, 1e-13) * scale;
    try {
        auto residual_at = [&](const CVec& y) { return CVec(flow_b(field, 0.0, s, y, eta, tol).z - z); };
        CVec F = residual_at(sh.y);
        double r = inf_norm(F);
        while (r > target && sh.iterations < opt.max_newton) {
            ++sh.iterations;
            CMat J(n, n);
            for (int l = 0; l < n; ++l) {
                CVec yp = sh.y, ym = sh.y;
                yp[l] += opt.newton_step;
                ym[l] -= opt.newton_step;
                J.col(l) = (flow_b(field, 0.0, s, yp, eta, tol).z - flow_b(field, 0.0, s, ym, eta, tol).z) / (2 * opt.newton_step);
            }
            const CVec dy = J.partialPivLu().solve(-F);
            double lambda = 1.0;
            bool moved = false;
            while (lambda >= 1.0 / 64) {
                const CVec yt = sh.y + lambda * dy;
                try {
                    const CVec Ft = residual_at(yt);
                    const double rt = inf_norm(Ft);
                    if (rt < r) {
                        sh.y = yt;
                        F = Ft;
                        r = rt;
                        moved = true;
                        break;
                    }
                } catch (const DomainError&) {
                }
                lambda /= 2;
            }
            if (!moved) break;
        }
        sh.residual = r;
        sh.converged = r <= target;
        if (!sh.converged) {
            sh.failure = "Newton for the inverse of J did not converge (residual " + num(r) + ")";
            return sh;
        }
        const auto fl = flow_b(field, 0.0, s, sh.y, eta, tol);
        sh.psi = dot(sh.y, eta) + fl.action;
        sh.zeta_s = fl.zeta;
    } catch (const std::exception& e) {
        sh.converged = false;
        sh.failure = e.what();
    }
    return sh;
}

}  // namespace

ComplexPhasePoint twisted_flow(const CoefficientField& field, double s, const ComplexPhasePoint& start, double tol,
                               Route route) {
    if (start.z.size() != field.n || start.zeta.size() != field.n)
        throw std::invalid_argument("twisted_flow: dimension mismatch");
    if (!(tol > 0)) throw std::invalid_argument("twisted_flow: tol must be positive");
    if (route == Route::automatic) route = start.on_real_base() ? Route::composition : Route::complex_ode;
    if (route == Route::composition) return compose(field, s, start, tol);
    const auto fl = flow_b(field, 0.0, s, start.z, start.zeta, tol);
    return {fl.z, fl.zeta};
}

ComplexPhasePoint twisted_flow_inverse(const CoefficientField& field, double s, const ComplexPhasePoint& end,
                                       double tol, Route route) {
    if (end.z.size() != field.n || end.zeta.size() != field.n)
        throw std::invalid_argument("twisted_flow_inverse: dimension mismatch");
    if (!(tol > 0)) throw std::invalid_argument("twisted_flow_inverse: tol must be positive");
    if (route == Route::automatic) route = end.on_real_base() ? Route::composition : Route::complex_ode;
    if (route == Route::composition) return compose_inverse(field, s, end, tol);
    const auto fl = flow_b(field, s, 0.0, end.z, end.zeta, tol);
    return {fl.z, fl.zeta};
}

GeneratingSample generating_function(const CoefficientField& field, double s, const CVec& z, const CVec& eta,
                                     double tol, const GeneratingOptions& opt) {
    const int n = field.n;
    if (z.size() != n || eta.size() != n) throw std::invalid_argument("generating_function: dimension mismatch");
    GeneratingSample g;
    g.s = s;
    g.z = z;
    g.eta = eta;
    const Shot sh = shoot(field, s, z, eta, tol, z, opt);
    g.y = sh.y;
    g.psi = sh.psi;
    g.zeta_s = sh.zeta_s;
    g.converged = sh.converged;
    g.newton_iterations = sh.iterations;
    g.residual = sh.residual;
    g.failure = sh.failure;
    if (!g.converged || !opt.gradients) return g;

    const double e = opt.fd_step;
    g.grad_z_psi = CVec::Zero(n);
    g.grad_eta_psi = CVec::Zero(n);
    for (int l = 0; l < n; ++l) {
        CVec zp = z, zm = z, ep = eta, em = eta;
        zp[l] += e;
        zm[l] -= e;
        ep[l] += e;
        em[l] -= e;
        const Shot a = shoot(field, s, zp, eta, tol, sh.y, opt), b = shoot(field, s, zm, eta, tol, sh.y, opt);
        const Shot c = shoot(field, s, z, ep, tol, sh.y, opt), d = shoot(field, s, z, em, tol, sh.y, opt);
        if (!(a.converged && b.converged && c.converged && d.converged)) {
            g.converged = false;
            g.failure = "finite-difference neighbour did not converge";
            return g;
        }
        g.grad_z_psi[l] = (a.psi - b.psi) / (2 * e);
        g.grad_eta_psi[l] = (c.psi - d.psi) / (2 * e);
    }
    return g;
}

PsiInfinity psi_infinity(const CoefficientField& field, const CVec& z, const CVec& eta, double tol, double s0,
                         double s_max) {
    PsiInfinity out;
    GeneratingOptions opt;
    opt.gradients = false;
    constexpr int levels = 3;
    std::vector<std::vector<cplx>> table;
    for (double s = s0; s <= s_max; s *= 2) {
        out.last = generating_function(field, s, z, eta, tol * 1e-2, opt);
        if (!out.last.converged) return out;
        out.horizons.push_back(s);
        out.raw.push_back(out.last.psi);
        const std::size_t k = table.size();
        std::vector<cplx> row{out.last.psi};
        for (std::size_t m = 1; m <= std::min<std::size_t>(k, levels); ++m) {
            const double f = std::pow(2.0, m * field.sigma) - 1.0;
            row.push_back(row[m - 1] + (row[m - 1] - table[k - 1][m - 1]) / f);
        }
        table.push_back(row);
        out.psi = row.back();
        if (field.metric_is_identity) {
            out.converged = true;
            return out;
        }
        if (k >= 2) {
            const std::size_t m = std::min<std::size_t>(k - 1, levels);
            if (std::abs(table[k][m] - table[k - 1][m]) < tol) {
                out.converged = true;
                return out;
            }
        }
    }
    return out;
}

SaddleReport saddle_check(const CoefficientField& field, double s, const CVec& z, double tol) {
    const int n = field.n;
    if (z.size() != n) throw std::invalid_argument("saddle_check: dimension mismatch");
    SaddleReport rep;
    rep.s = s;
    rep.z = z;
    GeneratingOptions opt;
    opt.gradients = false;
    const double ode_tol = std::min(tol, 1e-10) * 1e-2;
    const double e = opt.fd_step;

    try {
        const ComplexPhasePoint start{z, complexify(RVec(-z.imag()))};
        const auto pred = twisted_flow_inverse(field, s, start, ode_tol, Route::composition);
        rep.y_pred = pred.z;
        rep.eta_pred = pred.zeta;

        CVec warm = rep.y_pred;
        auto solve = [&](const CVec& eta) {
            Shot sh = shoot(field, s, z, eta, ode_tol, warm, opt);
            if (!sh.converged) throw std::runtime_error(sh.failure);
            return sh;
        };
        auto G = [&](const CVec& y, const CVec& eta, cplx psi) {
            return fbi::phi0(y) - (psi - dot(y, eta)).imag();
        };

        const Shot base = solve(rep.eta_pred);
        rep.critical_value = G(rep.y_pred, rep.eta_pred, base.psi);
        rep.value_gap = std::abs(rep.critical_value - fbi::phi0(z));

        // gradient over the 4n real coordinates (Re y, Im y, Re eta, Im eta)
        double g2 = 0.0;
        for (int l = 0; l < n; ++l)
            for (cplx dir : {cplx(1.0), I}) {
                CVec yp = rep.y_pred, ym = rep.y_pred;
                yp[l] += e * dir;
                ym[l] -= e * dir;
                const double dy = (G(yp, rep.eta_pred, base.psi) - G(ym, rep.eta_pred, base.psi)) / (2 * e);
                CVec ep = rep.eta_pred, em = rep.eta_pred;
                ep[l] += e * dir;
                em[l] -= e * dir;
                const double de = (G(rep.y_pred, ep, solve(ep).psi) - G(rep.y_pred, em, solve(em).psi)) / (2 * e);
                g2 += dy * dy + de * de;
            }
        rep.gradient_norm = std::sqrt(g2);

        // M(eta) = I + Im d(grad_eta psi)/d eta, with grad_eta psi = J^{-1}(z)
        auto hessian_matrix = [&](const CVec& eta) {
            RMat M = RMat::Identity(n, n);
            for (int l = 0; l < n; ++l) {
                CVec ep = eta, em = eta;
                ep[l] += e;
                em[l] -= e;
                M.col(l) += ((solve(ep).y - solve(em).y) / (2 * e)).imag();
            }
            return M;
        };
        rep.sigma_min = Eigen::JacobiSVD<RMat>(hessian_matrix(rep.eta_pred)).singularValues().minCoeff();

        // critical point: eta real with eta + Im J^{-1}(z) = 0
        RVec eta = -z.imag();
        const double target = std::max(tol, 1e-12);
        bool ok = false;
        for (int it = 0; it < opt.max_newton; ++it) {
            const Shot sh = solve(complexify(eta));
            warm = sh.y;
            const RVec g = eta + sh.y.imag();
            if (g.cwiseAbs().maxCoeff() <= target) {
                ok = true;
                break;
            }
            eta -= hessian_matrix(complexify(eta)).partialPivLu().solve(g);
        }
        rep.eta_crit = complexify(eta);
        rep.y_crit = solve(rep.eta_crit).y;
        rep.crit_distance = std::max(inf_norm(rep.y_crit - rep.y_pred), inf_norm(rep.eta_crit - rep.eta_pred));
        rep.converged = ok;
        if (!ok) rep.failure = "critical-point Newton did not converge";
    } catch (const std::exception& ex) {
        rep.converged = false;
        rep.failure = ex.what();
    }
    return rep;
}

namespace {

double fit_order(const std::vector<double>& lh, const std::vector<double>& le) {
    const double mh = std::accumulate(lh.begin(), lh.end(), 0.0) / lh.size();
    const double me = std::accumulate(le.begin(), le.end(), 0.0) / le.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lh.size(); ++i) {
        sxy += (lh[i] - mh) * (le[i] - me);
        sxx += (lh[i] - mh) * (lh[i] - mh);
    }
    return sxy / sxx;
}

// Order p of e(h) = h^p (a + b h): for fixed p, (a, b) by relative least squares;
// p minimises the residual by golden section on [0, 4].
double fit_order_corrected(const std::vector<double>& lh, const std::vector<double>& le) {
    const auto m = static_cast<Eigen::Index>(lh.size());
    auto rss = [&](double p) {
        RMat A(m, 2);
        RVec rhs(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double h = std::exp(lh[i]), g = std::exp(le[i] - p * lh[i]);
            A(i, 0) = 1.0 / g;
            A(i, 1) = h / g;
            rhs[i] = 1.0;
        }
        const RVec c = A.colPivHouseholderQr().solve(rhs);
        return (A * c - rhs).squaredNorm();
    };
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = 0.0, b = 4.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = rss(x1), f2 = rss(x2);
    while (b - a > 1e-10) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = rss(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = rss(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

EgorovReport symbol_action_check(const std::function<cplx(const RVec&)>& f, const flow::PhasePoint& p0, double t,
                                 const std::vector<double>& h_grid, double L, int N) {
    const int n = static_cast<int>(p0.x.size());
    EgorovReport rep;
    rep.point = p0;
    rep.t = t;
    rep.target = f(p0.x + t * p0.xi);
    const CVec z0 = complexify(p0.x) - I * complexify(p0.xi);
    std::vector<double> lh, le;
    for (double h : h_grid) {
        if (!(h > 0)) throw std::invalid_argument("symbol_action_check: h must be positive");
        const auto u = GridFunction::sample(n, L, N, [&](const RVec& x) {
            return std::exp(cplx(-(x - p0.x).squaredNorm() / (2 * h), p0.xi.dot(x) / h));
        });
        const auto su = schrod::weyl_linear_sandwich(f, u, t, h);
        const cplx den = fbi::fbi_transform(u, z0, h);
        EgorovRow row;
        row.h = h;
        if (den == 0.0 || !std::isfinite(std::abs(den))) {
            rep.flag = "vanishing denominator";
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            row.error = std::numeric_limits<double>::quiet_NaN();
        } else {
            row.ratio = fbi::fbi_transform(su, z0, h) / den;
            row.error = std::abs(row.ratio - rep.target);
            if (row.error > 1e-14) {
                lh.push_back(std::log(h));
                le.push_back(std::log(row.error));
            }
        }
        rep.rows.push_back(row);
    }
    if (rep.flag.empty() && lh.size() < 2) {
        rep.exact = true;
        return rep;
    }
    if (lh.size() >= 2) rep.slope = fit_order(lh, le);
    rep.order = lh.size() >= 3 ? fit_order_corrected(lh, le) : rep.slope;
    return rep;
}

CVec contour_point(const CVec& z, const CVec& y, double R) {
    return (y + z) / 2.0 - I * complexify(RVec(z.imag())) - R * (z - y).conjugate();
}

ContourReport contour_diagnostics(const CVec& z, const std::vector<CVec>& y_samples, double R) {
    if (!(R > 1)) throw std::invalid_argument("contour_diagnostics: R must exceed 1");
    ContourReport rep;
    rep.z = z;
    rep.R = R;
    rep.samples = static_cast<int>(y_samples.size());
    const double p0 = fbi::phi0(z);
    for (const auto& y : y_samples) {
        const CVec x = contour_point(z, y, R);
        const CVec zx = z - x, xy = x - y;
        const double phi = fbi::phi0(y) + (-dot(zx, zx) / 2.0 + dot(xy, xy) / 2.0).real();
        const CVec d = y - z;
        const double closed = p0 - (R - 0.5) * d.imag().squaredNorm() - R * d.real().squaredNorm();
        rep.max_residual = std::max(rep.max_residual, std::abs(phi - closed));
        const double dist = d.norm();
        if (dist == 0.0) continue;
        const double dx = (x - complexify(RVec(z.real()))).norm();
        rep.max_x_ratio = std::max(rep.max_x_ratio, dx / dist);
        if (dx > (1 + R) * dist * (1 + 1e-12)) rep.bound_holds = false;
        const double drop = p0 - phi;
        if (drop <= 0.0) {
            rep.bound_holds = false;
            continue;
        }
        rep.best_constant = std::max(rep.best_constant, (dx * dx + dist * dist) / drop);
    }
    return rep;
}

std::vector<CVec> contour_samples(const CVec& z, double r, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto n = z.size();
    std::vector<CVec> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        RVec v(2 * n);
        for (auto& c : v) c = g(rng);
        v *= r * std::pow(u(rng), 1.0 / (2 * n)) / v.norm();
        CVec d(n);
        for (Eigen::Index j = 0; j < n; ++j) d[j] = cplx(v[j], v[n + j]);
        out.push_back(z + d);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json cjson(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

nlohmann::json cjson(const CVec& v) {
    auto a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cjson(v[i]));
    return a;
}

nlohmann::json rjson(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json to_json(const SaddleReport& r) {
    return {{"s", r.s},
            {"z", cjson(r.z)},
            {"y_pred", cjson(r.y_pred)},
            {"eta_pred", cjson(r.eta_pred)},
            {"y_crit", cjson(r.y_crit)},
            {"eta_crit", cjson(r.eta_crit)},
            {"gradient_norm", r.gradient_norm},
            {"critical_value", r.critical_value},
            {"value_gap", r.value_gap},
            {"sigma_min", r.sigma_min},
            {"crit_distance", r.crit_distance},
            {"converged", r.converged},
            {"failure", r.failure}};
}

nlohmann::json to_json(const EgorovReport& r) {
    auto rows = nlohmann::json::array();
    for (const auto& row : r.rows) rows.push_back({{"h", row.h}, {"ratio", cjson(row.ratio)}, {"error", row.error}});
    return {{"x0", rjson(r.point.x)}, {"xi0", rjson(r.point.xi)}, {"t", r.t},       {"target", cjson(r.target)},
            {"rows", rows},           {"order", r.order},        {"slope", r.slope},        {"exact", r.exact}, {"flag", r.flag}};
}

nlohmann::json to_json(const ContourReport& r) {
    return {{"z", cjson(r.z)},
            {"R", r.R},
            {"samples", r.samples},
            {"max_residual", r.max_residual},
            {"best_constant", r.best_constant},
            {"max_x_ratio", r.max_x_ratio},
            {"bound_holds", r.bound_holds}};
}

nlohmann::json to_json(const GeneratingSample& g) {
    return {{"s", g.s},
            {"z", cjson(g.z)},
            {"eta", cjson(g.eta)},
            {"psi", cjson(g.psi)},
            {"grad_z_psi", cjson(g.grad_z_psi)},
            {"grad_eta_psi", cjson(g.grad_eta_psi)},
            {"y", cjson(g.y)},
            {"converged", g.converged},
            {"newton_iterations", g.newton_iterations},
            {"residual", g.residual},
            {"failure", g.failure}};
}

void write_generating_csv(std::ostream& os, const std::vector<GeneratingSample>& rows) {
    const auto n = rows.empty() ? 1 : rows.front().z.size();
    auto cols = [&](const std::string& base) {
        std::string out;
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::string b = n == 1 ? base : base + std::to_string(j + 1);
            out += "," + b + "_re," + b + "_im";
        }
        return out;
    };
    os << "s" << cols("z") << cols("eta") << ",psi_re,psi_im" << cols("y") << ",converged\n";
    auto put = [&](const CVec& v) {
        for (Eigen::Index j = 0; j < n; ++j)
            os << ',' << (j < v.size() ? num(v[j].real()) : "") << ',' << (j < v.size() ? num(v[j].imag()) : "");
    };
    for (const auto& g : rows) {
        os << num(g.s);
        put(g.z);
        put(g.eta);
        os << ',' << num(g.psi.real()) << ',' << num(g.psi.imag());
        put(g.y);
        os << ',' << (g.converged ? 1 : 0) << '\n';
    }
}

}  // namespace wavefront::microlocal
