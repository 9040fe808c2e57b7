#include "wavefront/schrod.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <tuple>

#include <fftw3.h>

#include "wavefront/io_util.hpp"

namespace wavefront::schrod {

namespace {

std::mutex plan_mutex;

// FFTW planning is not thread safe; execution on fresh arrays is.
fftw_plan get_plan(int n, int N, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    const auto key = std::make_tuple(n, N, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<int> dims(n, N);
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(N);
    auto* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(n, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("FFTW planning failed");
    cache.emplace(key, p);
    return p;
}

void execute(GridFunction& u, int sign) {
    auto* data = reinterpret_cast<fftw_complex*>(u.values.data());
    fftw_execute_dft(get_plan(u.n, u.N, sign), data, data);
}

// Per-axis wavenumber of every grid point (flat index, axis 0 slowest).
std::vector<std::vector<double>> wavenumber_grid(int n, int N, double L) {
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(N);
    std::vector<std::vector<double>> k(n, std::vector<double>(total));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int j = n - 1; j >= 0; --j) {
            k[j][idx] = wavenumber(static_cast<int>(rem % N), N, L);
            rem /= N;
        }
    }
    return k;
}

double raw_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& x : v) s += std::norm(x);
    return std::sqrt(s);
}

void check_same_grid(const GridFunction& u, int n, double L, int N) {
    if (u.n != n || u.N != N || u.L != L) throw std::invalid_argument("grid function does not match the Hamiltonian grid");
}

}  // namespace

double wavenumber(int i, int N, double L) {
    const int m = i < N / 2 ? i : i - N;
    return m * std::numbers::pi / L;
}

void fft_forward(GridFunction& u) { execute(u, FFTW_FORWARD); }

void fft_inverse(GridFunction& u) {
    execute(u, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(u.size());
    for (auto& v : u.values) v *= s;
}

GridFunction derivative(const GridFunction& u, int axis) {
    if (axis < 0 || axis >= u.n) throw std::invalid_argument("derivative: bad axis");
    const auto k = wavenumber_grid(u.n, u.N, u.L);
    GridFunction d = u;
    fft_forward(d);
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] *= k[axis][i];
    fft_inverse(d);
    return d;
}

// ---------------------------------------------------------------------------

DiscreteHamiltonian::DiscreteHamiltonian(const coeffs::CoefficientField& field, int n, double L, int N)
    : field_(field), n_(n), L_(L), N_(N) {
    if (field.n != n) throw std::invalid_argument("Hamiltonian grid dimension does not match the field");
    identity_metric_ = field.metric_is_identity;
    no_first_order_ = field.first_order_vanishes;
    no_potential_ = field.potential_vanishes;
    const GridFunction probe(n, L, N);
    const std::size_t total = probe.size();
    a2_.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(total)));
    a1_.assign(n, std::vector<double>(total));
    a0_.assign(total, 0.0);
    k_ = wavenumber_grid(n, N, L);
    CVec z(n);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int j = n - 1; j >= 0; --j) {
            z[j] = probe.coord(static_cast<int>(rem % N));
            rem /= N;
        }
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) a2_[j][k][idx] = field.a2[j][k](z).real();
            a1_[j][idx] = field.a1[j](z).real();
        }
        a0_[idx] = field.a0(z).real();
    }
}

double DiscreteHamiltonian::spectral_bound() const {
    double amax = 0.0, v = 0.0;
    for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
            for (double a : a2_[j][k]) amax = std::max(amax, std::abs(a));
    for (double a : a0_) v = std::max(v, std::abs(a));
    const double kn = N_ / 2 * std::numbers::pi / L_;
    return 0.5 * n_ * n_ * amax * kn * kn + v;
}

GridFunction DiscreteHamiltonian::apply(const GridFunction& u) const {
    check_same_grid(u, n_, L_, N_);
    const std::size_t total = u.size();
    const auto& k = k_;
    GridFunction U = u;
    fft_forward(U);
    GridFunction S(n_, L_, N_);  // spectral accumulator of the divergence-form terms

    if (identity_metric_) {
        for (std::size_t i = 0; i < total; ++i) {
            double k2 = 0.0;
            for (int j = 0; j < n_; ++j) k2 += k[j][i] * k[j][i];
            S.values[i] = 0.5 * k2 * U.values[i];
        }
    }
    std::vector<GridFunction> Du;
    if (!identity_metric_ || !no_first_order_) {
        for (int j = 0; j < n_; ++j) {
            GridFunction d = U;
            for (std::size_t i = 0; i < total; ++i) d.values[i] *= k[j][i];
            fft_inverse(d);
            Du.push_back(std::move(d));
        }
    }
    if (!identity_metric_) {
        for (int j = 0; j < n_; ++j) {
            GridFunction w(n_, L_, N_);
            for (int kk = 0; kk < n_; ++kk)
                for (std::size_t i = 0; i < total; ++i) w.values[i] += a2_[j][kk][i] * Du[kk].values[i];
            fft_forward(w);
            for (std::size_t i = 0; i < total; ++i) S.values[i] += 0.5 * k[j][i] * w.values[i];
        }
    }
    GridFunction out(n_, L_, N_);
    if (!no_first_order_) {
        for (int j = 0; j < n_; ++j) {
            GridFunction w(n_, L_, N_);
            for (std::size_t i = 0; i < total; ++i) {
                w.values[i] = a1_[j][i] * u.values[i];
                out.values[i] += 0.5 * a1_[j][i] * Du[j].values[i];
            }
            fft_forward(w);
            for (std::size_t i = 0; i < total; ++i) S.values[i] += 0.5 * k[j][i] * w.values[i];
        }
    }
    fft_inverse(S);
    for (std::size_t i = 0; i < total; ++i) out.values[i] += S.values[i];
    if (!no_potential_)
        for (std::size_t i = 0; i < total; ++i) out.values[i] += a0_[i] * u.values[i];
    return out;
}

// ---------------------------------------------------------------------------

EvolutionResult free_propagate(const GridFunction& u0, double t, double h) {
    EvolutionResult r;
    r.t = t;
    r.u_t = u0;
    if (t != 0.0) {
        const auto k = wavenumber_grid(u0.n, u0.N, u0.L);
        fft_forward(r.u_t);
        for (std::size_t i = 0; i < r.u_t.size(); ++i) {
            double k2 = 0.0;
            for (int j = 0; j < u0.n; ++j) k2 += k[j][i] * k[j][i];
            r.u_t.values[i] *= std::polar(1.0, -0.5 * t * h * k2);
        }
        fft_inverse(r.u_t);
    }
    const double n0 = raw_norm(u0.values);
    r.norm_drift = n0 > 0 ? std::abs(raw_norm(r.u_t.values) - n0) / n0 : 0.0;
    r.steps = 1;
    r.boundary_mass = boundary_mass(r.u_t);
    return r;
}

namespace {

cplx phi1(cplx z) {
    if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
    return (std::exp(z) - 1.0) / z;
}

}  // namespace

EvolutionResult propagate(const DiscreteHamiltonian& H, const GridFunction& u0, double t, double tol,
                          const KrylovOptions& opt) {
    if (!(tol > 0)) throw std::invalid_argument("propagate: tol must be positive");
    check_same_grid(u0, H.n(), H.L(), H.N());
    EvolutionResult r;
    r.u_t = u0;
    const double n0 = raw_norm(u0.values);
    if (t == 0.0 || n0 == 0.0) {
        r.t = t;
        r.boundary_mass = boundary_mass(r.u_t);
        return r;
    }
    const auto total = static_cast<Eigen::Index>(u0.size());
    const int m = opt.max_dim;
    CMat V(total, m);  // Lanczos basis, one column per vector
    GridFunction scratch = u0;
    double t_done = 0.0, tau_prev = 0.5 * t;
    const double sign = t > 0 ? 1.0 : -1.0;

    while (t_done != t) {
        auto um = Eigen::Map<CVec>(r.u_t.values.data(), total);
        const double beta = um.norm();
        V.col(0) = um / beta;
        RMat T = RMat::Zero(m, m);
        int dim = m;
        bool exact = false;
        double beta_last = 0.0;
        for (int j = 0; j < m; ++j) {
            Eigen::Map<CVec>(scratch.values.data(), total) = V.col(j);
            GridFunction w = H.apply(scratch);
            ++r.matvecs;
            auto wm = Eigen::Map<CVec>(w.values.data(), total);
            // full reorthogonalisation, two passes
            for (int pass = 0; pass < 2; ++pass) {
                const CVec c = V.leftCols(j + 1).adjoint() * wm;
                wm.noalias() -= V.leftCols(j + 1) * c;
                T(j, j) += c[j].real();
            }
            const double b = wm.norm();
            if (b <= 1e-12 * std::max(1.0, std::abs(T(j, j)))) {
                dim = j + 1;
                exact = true;
                break;
            }
            if (j + 1 < m) {
                T(j + 1, j) = T(j, j + 1) = b;
                V.col(j + 1) = wm / b;
            } else {
                beta_last = b;
            }
        }
        const Eigen::SelfAdjointEigenSolver<RMat> es(T.topLeftCorner(dim, dim));
        const RVec& lam = es.eigenvalues();
        const RMat& Q = es.eigenvectors();

        auto error_estimate = [&](double tau) {
            if (exact) return 0.0;
            cplx s = 0.0;
            for (int i = 0; i < dim; ++i) s += Q(dim - 1, i) * phi1(cplx(0, -tau * lam[i])) * Q(0, i);
            return beta * std::abs(tau) * beta_last * std::abs(s);
        };
        const double remaining = t - t_done;
        double tau = sign * std::min(std::abs(remaining), 2.0 * std::abs(tau_prev));
        while (error_estimate(tau) > tol * beta * std::abs(tau) / std::abs(t)) {
            tau *= opt.shrink;
            if (std::abs(tau) < 1e-13 * std::abs(t)) {
                r.ok = false;
                r.failure = "Krylov step underflow at t=" + num(t_done);
                r.t = t_done;
                r.norm_drift = std::abs(raw_norm(r.u_t.values) - n0) / n0;
                r.boundary_mass = boundary_mass(r.u_t);
                return r;
            }
        }
        CVec c = CVec::Zero(dim);
        for (int i = 0; i < dim; ++i) c += Q.col(i).cast<cplx>() * (std::polar(1.0, -tau * lam[i]) * Q(0, i));
        um.noalias() = V.leftCols(dim) * (beta * c);
        t_done = tau == remaining ? t : t_done + tau;
        tau_prev = tau;
        ++r.steps;
    }
    r.t = t;
    r.norm_drift = std::abs(raw_norm(r.u_t.values) - n0) / n0;
    r.boundary_mass = boundary_mass(r.u_t);
    return r;
}

EvolutionResult conjugated_evolution(const DiscreteHamiltonian& H, const GridFunction& u0, double t, double tol,
                                     const KrylovOptions& opt) {
    EvolutionResult r = propagate(H, u0, t, tol, opt);
    if (!r.ok) return r;
    auto back = free_propagate(r.u_t, -t);
    r.u_t = std::move(back.u_t);
    const double n0 = raw_norm(u0.values);
    r.norm_drift = n0 > 0 ? std::abs(raw_norm(r.u_t.values) - n0) / n0 : 0.0;
    r.boundary_mass = std::max(r.boundary_mass, boundary_mass(r.u_t));
    return r;
}

GridFunction weyl_linear_sandwich(const std::function<cplx(const RVec&)>& f, const GridFunction& u, double t,
                                  double h) {
    GridFunction v = t == 0.0 ? u : free_propagate(u, t, h).u_t;
    RVec x(u.n);
    for (std::size_t idx = 0; idx < v.size(); ++idx) {
        std::size_t rem = idx;
        for (int j = u.n - 1; j >= 0; --j) {
            x[j] = v.coord(static_cast<int>(rem % u.N));
            rem /= u.N;
        }
        v.values[idx] *= f(x);
    }
    return t == 0.0 ? v : free_propagate(v, -t, h).u_t;
}

GridFunction refine(const GridFunction& u, int factor) {
    if (factor < 1 || (factor & (factor - 1)) != 0) throw std::invalid_argument("refine: factor must be a power of two");
    if (factor == 1) return u;
    GridFunction U = u;
    fft_forward(U);
    const int N = u.N, M = u.N * factor;
    GridFunction out(u.n, u.L, M);
    std::vector<int> idx(u.n, 0);
    for (std::size_t src = 0; src < U.size(); ++src) {
        std::size_t rem = src;
        for (int j = u.n - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(rem % N);
            rem /= N;
        }
        // the Nyquist coefficient is split evenly between +N/2 and -N/2
        std::vector<std::vector<int>> targets(u.n);
        for (int j = 0; j < u.n; ++j) {
            const int i = idx[j];
            if (i < N / 2) targets[j] = {i};
            else if (i > N / 2) targets[j] = {i - N + M};
            else targets[j] = {N / 2, M - N / 2};
        }
        double weight = 1.0;
        for (int j = 0; j < u.n; ++j) weight *= 1.0 / targets[j].size();
        std::vector<std::size_t> pos(u.n, 0);
        for (;;) {
            std::size_t dst = 0;
            for (int j = 0; j < u.n; ++j) dst = dst * M + targets[j][pos[j]];
            out.values[dst] += weight * U.values[src];
            int j = u.n - 1;
            while (j >= 0 && ++pos[j] >= targets[j].size()) {
                pos[j] = 0;
                --j;
            }
            if (j < 0) break;
        }
    }
    fft_inverse(out);
    const double scale = std::pow(double(factor), u.n);
    for (auto& v : out.values) v *= scale;
    return out;
}

double boundary_mass(const GridFunction& u) {
    double edge = 0.0, all = 0.0;
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        const double w = std::norm(u.values[idx]);
        all += w;
        std::size_t rem = idx;
        bool near = false;
        for (int j = 0; j < u.n; ++j) {
            const int i = static_cast<int>(rem % u.N);
            rem /= u.N;
            if (i < 2 || i >= u.N - 2) near = true;
        }
        if (near) edge += w;
    }
    return all > 0 ? std::sqrt(edge / all) : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::istream& is) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), 8)) throw std::runtime_error("grid snapshot truncated");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void write_binary(std::ostream& os, const GridFunction& u) {
    put_le<std::int64_t>(os, u.n);
    put_le<std::int64_t>(os, u.N);
    put_le<double>(os, u.L);
    for (const cplx& v : u.values) {
        put_le<double>(os, v.real());
        put_le<double>(os, v.imag());
    }
}

GridFunction read_binary(std::istream& is) {
    const auto n = get_le<std::int64_t>(is);
    const auto N = get_le<std::int64_t>(is);
    const auto L = get_le<double>(is);
    if (n < 1 || n > 3 || N < 2 || N > (1 << 24)) throw std::runtime_error("grid snapshot header is invalid");
    GridFunction u(static_cast<int>(n), L, static_cast<int>(N));
    for (auto& v : u.values) {
        const double re = get_le<double>(is);
        const double im = get_le<double>(is);
        v = cplx(re, im);
    }
    return u;
}

void write_binary_file(const std::string& path, const GridFunction& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_binary(os, u);
}

GridFunction read_binary_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_binary(is);
}

void write_slice_csv(std::ostream& os, const GridFunction& u) {
    os << "x,re,im\n";
    std::size_t stride = 1, offset = 0;
    for (int j = 1; j < u.n; ++j) stride *= u.N;
    for (int j = 1; j < u.n; ++j) offset = offset * u.N + u.N / 2;
    for (int i = 0; i < u.N; ++i) {
        const cplx v = u.values[i * stride + offset];
        os << num(u.coord(i)) << ',' << num(v.real()) << ',' << num(v.imag()) << '\n';
    }
}

}  // namespace wavefront::schrod
