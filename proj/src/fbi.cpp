#include "wavefront/fbi.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <ostream>

#include "wavefront/io_util.hpp"

namespace wavefront {

GridFunction::GridFunction(int n_, double L_, int N_) : n(n_), L(L_), N(N_) {
    if (n < 1) throw std::invalid_argument("GridFunction: dimension must be positive");
    if (N < 2 || (N & (N - 1)) != 0) throw std::invalid_argument("GridFunction: N must be a power of two");
    if (!(L > 0)) throw std::invalid_argument("GridFunction: L must be positive");
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(N);
    values.assign(total, 0.0);
}

double GridFunction::l2_norm() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::norm(v);
    return std::sqrt(s * std::pow(dx(), n));
}

GridFunction GridFunction::sample(int n, double L, int N, const std::function<cplx(const RVec&)>& f) {
    GridFunction g(n, L, N);
    RVec x(n);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        std::size_t rem = idx;
        for (int j = n - 1; j >= 0; --j) {
            x[j] = g.coord(static_cast<int>(rem % N));
            rem /= N;
        }
        g.values[idx] = f(x);
    }
    return g;
}

}  // namespace wavefront

namespace wavefront::fbi {

CVec FbiPoint::z() const { return x0.cast<cplx>() - I * xi0.cast<cplx>(); }

FbiPoint FbiPoint::from_z(const CVec& z) { return {z.real(), -z.imag()}; }

namespace {

constexpr double kContainLog = 36.841361487904734;  // ln 1e16
constexpr double kSumLog = 40.0;                     // terms below e^{-40} are dropped

struct WeightedSum {
    cplx value;
    double mass;  // sum |kernel| |u| dx^n
};

WeightedSum weighted_sum(const GridFunction& u, const CVec& z, double h) {
    if (!(h > 0)) throw std::invalid_argument("fbi: h must be positive");
    if (z.size() != u.n) throw std::invalid_argument("fbi: point dimension does not match grid");
    const double dx = u.dx();
    const double contain = std::sqrt(2 * h * kContainLog), reach = std::sqrt(2 * h * kSumLog);
    std::vector<int> lo(u.n), hi(u.n);
    std::vector<std::vector<cplx>> ker(u.n);
    for (int j = 0; j < u.n; ++j) {
        const double a0 = z[j].real(), b = z[j].imag();
        if (a0 - contain < -u.L || a0 + contain > u.L)
            throw ContainmentError("fbi: window at Re z_" + std::to_string(j) + " = " + num(a0) + " with h = " + num(h)
                                   + " leaks outside the box [-" + num(u.L) + ", " + num(u.L) + ")");
        lo[j] = std::max(0, static_cast<int>(std::floor((a0 - reach + u.L) / dx)));
        hi[j] = std::min(u.N - 1, static_cast<int>(std::ceil((a0 + reach + u.L) / dx)));
        ker[j].resize(hi[j] - lo[j] + 1);
        for (int i = lo[j]; i <= hi[j]; ++i) {
            const double a = a0 - u.coord(i);
            ker[j][i - lo[j]] = std::exp(cplx(-a * a / (2 * h), -a * b / h));
        }
    }
    WeightedSum out{0.0, 0.0};
    if (u.n == 1) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
            const cplx k = ker[0][i - lo[0]];
            out.value += k * u.values[i];
            out.mass += std::abs(k) * std::abs(u.values[i]);
        }
    } else {
        std::vector<int> idx(lo);
        for (;;) {
            std::size_t flat = 0;
            cplx k = 1.0;
            for (int j = 0; j < u.n; ++j) {
                flat = flat * u.N + idx[j];
                k *= ker[j][idx[j] - lo[j]];
            }
            out.value += k * u.values[flat];
            out.mass += std::abs(k) * std::abs(u.values[flat]);
            int j = u.n - 1;
            while (j >= 0 && ++idx[j] > hi[j]) {
                idx[j] = lo[j];
                --j;
            }
            if (j < 0) break;
        }
    }
    const double vol = std::pow(dx, u.n);
    out.value *= vol;
    out.mass *= vol;
    return out;
}

}  // namespace

cplx weighted_fbi(const GridFunction& u, const CVec& z, double h) { return weighted_sum(u, z, h).value; }

cplx fbi_transform(const GridFunction& u, const CVec& z, double h) {
    return weighted_sum(u, z, h).value * std::exp(phi0(z) / h);
}

std::vector<CVec> omega_lattice(const Omega& omega, double spacing) {
    const int n = static_cast<int>(omega.z0.size());
    const int m = static_cast<int>(std::floor(omega.radius / spacing + 1e-12));
    const int dim = 2 * n;
    std::vector<CVec> pts;
    std::vector<int> k(dim, -m);
    for (;;) {
        long sq = 0;
        for (int v : k) sq += static_cast<long>(v) * v;
        if (std::sqrt(double(sq)) * spacing <= omega.radius * (1 + 1e-12)) {
            CVec z = omega.z0;
            for (int j = 0; j < n; ++j) z[j] += cplx(k[2 * j] * spacing, k[2 * j + 1] * spacing);
            pts.push_back(z);
        }
        int j = dim - 1;
        while (j >= 0 && ++k[j] > m) {
            k[j] = -m;
            --j;
        }
        if (j < 0) break;
    }
    return pts;
}

namespace {

struct NormAndFloor {
    double norm;
    double floor;
};

NormAndFloor norm_and_floor(const GridFunction& u, const Omega& omega, double h, double spacing, double noise_rel) {
    const auto pts = omega_lattice(omega, spacing);
    const double cell = std::pow(spacing, 2 * u.n);
    double s = 0.0, f = 0.0;
    for (const CVec& z : pts) {
        const auto w = weighted_sum(u, z, h);
        s += std::norm(w.value);
        f += (noise_rel * w.mass) * (noise_rel * w.mass);
    }
    return {std::sqrt(s * cell), std::sqrt(f * cell)};
}

}  // namespace

double weighted_fbi_norm(const GridFunction& u, const Omega& omega, double h, std::optional<double> spacing) {
    const double sp = spacing.value_or(0.5 * omega.radius);
    if (!(sp > 0)) throw std::invalid_argument("weighted_fbi_norm: spacing must be positive");
    return norm_and_floor(u, omega, h, sp, 0.0).norm;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::regular: return "regular";
        case Verdict::singular: return "singular";
        case Verdict::undetermined: return "undetermined";
    }
    return "?";
}

namespace {

struct Fit {
    double delta = 0.0;
    double log_h = 0.0;
    double r2 = 0.0;
};

// Least squares for y = c0 + c1 log h - delta / h (with_log) or y = c0 - delta / h.
Fit fit_decay(const std::vector<double>& h, const std::vector<double>& y, bool with_log) {
    const int m = static_cast<int>(h.size()), p = with_log ? 3 : 2;
    RMat A(m, p);
    RVec b(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, p - 1) = -1.0 / h[i];
        if (with_log) A(i, 1) = std::log(h[i]);
        b[i] = y[i];
    }
    const RVec c = A.colPivHouseholderQr().solve(b);
    Fit f;
    f.delta = c[p - 1];
    f.log_h = with_log ? c[1] : 0.0;
    const double mean = b.mean();
    const double ss_tot = (b.array() - mean).square().sum();
    const double ss_res = (A * c - b).squaredNorm();
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

DecayEstimate decay_rate_estimate(const GridFunction& u, const FbiPoint& z0, const std::vector<double>& h_grid,
                                  double omega_radius, const Thresholds& th) {
    if (h_grid.size() < 3) throw std::invalid_argument("decay_rate_estimate: need at least 3 h values");
    for (std::size_t i = 1; i < h_grid.size(); ++i)
        if (!(h_grid[i] < h_grid[i - 1])) throw std::invalid_argument("decay_rate_estimate: h grid must decrease");
    if (z0.xi0.norm() == 0.0) throw std::invalid_argument("decay_rate_estimate: xi0 must be nonzero");

    DecayEstimate est;
    est.point = z0;
    est.omega_radius = omega_radius;
    const double band = th.band_limit > 0.0 ? th.band_limit : std::numbers::pi / u.dx();
    const double xi_max = z0.xi0.cwiseAbs().maxCoeff();
    for (double h : h_grid)
        if (xi_max / h + th.band_sigmas / std::sqrt(h) <= band) est.h_values.push_back(h);
    const std::size_t dropped = h_grid.size() - est.h_values.size();
    const std::string band_note = dropped ? std::to_string(dropped) + " h value(s) beyond the grid band" : "";
    if (est.h_values.size() < 3) {
        est.flag = band_note + "; fewer than 3 h values left";
        est.verdict = Verdict::undetermined;
        return est;
    }
    const double h_max = h_grid.front();
    bool all_tiny = true;
    std::vector<double> hu, yu;
    for (double h : est.h_values) {
        const double r = omega_radius * h / h_max;
        const auto nf = norm_and_floor(u, Omega{z0.z(), r}, h, 0.5 * r, th.noise_rel);
        const double ln = std::log(std::max(nf.norm, 1e-300));
        est.log_norms.push_back(ln);
        est.log_floors.push_back(std::log(std::max(nf.floor, 1e-300)));
        const bool cens = nf.norm <= nf.floor;
        est.censored.push_back(cens);
        if (nf.norm >= 1e-300) all_tiny = false;
        if (!cens) {
            hu.push_back(h);
            yu.push_back(ln);
        }
    }
    if (all_tiny) {
        est.flag = "degenerate: all norms below 1e-300";
        est.verdict = Verdict::undetermined;
        return est;
    }
    if (hu.size() >= 3) {
        const Fit f = fit_decay(hu, yu, true);
        est.delta_hat = f.delta;
        est.log_h_coeff = f.log_h;
        est.r2 = f.r2;
        if (hu.size() < est.h_values.size())
            est.flag = "censored " + std::to_string(est.h_values.size() - hu.size()) + " point(s)";
        if (dropped) est.flag += (est.flag.empty() ? "" : "; ") + band_note;
        if (est.delta_hat >= th.delta_reg && est.r2 >= th.r2_min) est.verdict = Verdict::regular;
        else if (est.delta_hat <= th.delta_sing) est.verdict = Verdict::singular;
        else est.verdict = Verdict::undetermined;
        return est;
    }
    if (hu.size() == 2) {
        const Fit f = fit_decay(hu, yu, false);
        est.delta_hat = f.delta;
        est.r2 = f.r2;
        est.flag = "two-point slope; smaller h censored at the noise floor";
        if (dropped) est.flag += "; " + band_note;
        est.verdict = est.delta_hat >= th.delta_reg ? Verdict::regular : Verdict::undetermined;
        return est;
    }
    const Fit f = fit_decay(est.h_values, est.log_norms, false);
    est.delta_hat = f.delta;
    est.r2 = f.r2;
    est.flag = "below noise floor at all h";
    if (dropped) est.flag += "; " + band_note;
    est.verdict = Verdict::regular;
    return est;
}

WavefrontReport wavefront_indicator(const GridFunction& u, const std::vector<FbiPoint>& seeds,
                                    const std::vector<double>& h_grid, const Thresholds& th, double omega_radius) {
    WavefrontReport rep;
    for (const auto& s : seeds) {
        WavefrontEntry e{s, std::nullopt, {}};
        try {
            e.estimate = decay_rate_estimate(u, s, h_grid, omega_radius, th);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

namespace {

void header_vec(std::ostream& os, const char* name, int n) {
    if (n == 1) {
        os << name;
        return;
    }
    for (int j = 1; j <= n; ++j) os << (j > 1 ? "," : "") << name << '_' << j;
}

void values_vec(std::ostream& os, const RVec& v) {
    for (int j = 0; j < v.size(); ++j) os << (j ? "," : "") << num(v[j]);
}

}  // namespace

void write_report_csv(std::ostream& os, const WavefrontReport& rep) {
    const int n = rep.entries.empty() ? 1 : static_cast<int>(rep.entries.front().seed.x0.size());
    header_vec(os, "x0", n);
    os << ',';
    header_vec(os, "xi0", n);
    os << ",delta_hat,r2,verdict,flag\n";
    for (const auto& e : rep.entries) {
        values_vec(os, e.seed.x0);
        os << ',';
        values_vec(os, e.seed.xi0);
        if (e.estimate) {
            os << ',' << num(e.estimate->delta_hat) << ',' << num(e.estimate->r2) << ','
               << to_string(e.estimate->verdict) << ',' << e.estimate->flag << '\n';
        } else {
            os << ",,,undetermined,error: " << e.error << '\n';
        }
    }
}

nlohmann::json to_json(const DecayEstimate& e) {
    std::vector<double> x0(e.point.x0.data(), e.point.x0.data() + e.point.x0.size());
    std::vector<double> xi0(e.point.xi0.data(), e.point.xi0.data() + e.point.xi0.size());
    return nlohmann::json{{"x0", x0},
                          {"xi0", xi0},
                          {"h_values", e.h_values},
                          {"log_norms", e.log_norms},
                          {"log_floors", e.log_floors},
                          {"censored", e.censored},
                          {"omega_radius", e.omega_radius},
                          {"delta_hat", e.delta_hat},
                          {"r2", e.r2},
                          {"log_h_coeff", e.log_h_coeff},
                          {"verdict", to_string(e.verdict)},
                          {"flag", e.flag}};
}

nlohmann::json to_json(const WavefrontReport& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : rep.entries) {
        if (e.estimate) arr.push_back(to_json(*e.estimate));
        else arr.push_back({{"error", e.error}, {"verdict", "undetermined"}});
    }
    return nlohmann::json{{"entries", arr}};
}

}  // namespace wavefront::fbi
