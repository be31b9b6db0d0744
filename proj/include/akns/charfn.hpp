#pragma once

#include "akns/core.hpp"
#include "akns/fourier.hpp"
#include "akns/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace akns {

enum class ProductKind { sine_type, cosine_type };

// S(z) = sin z * prod (zeta_n - z)/(pi n - z) or C(z) = cos z * prod (zeta_n - z)/(pi(n+1/2) - z).
struct CanonicalProduct {
    ProductKind kind = ProductKind::sine_type;
    int N = 0;
    std::vector<double> zeros;  // n = -N..N
    TailPolicy tail_policy = TailPolicy::zero_remainder;
    TailModel tail;
    int extended = 4096;  // explicit tail factors up to this index under the asymptotic policy

    CanonicalProduct() = default;
    CanonicalProduct(ProductKind k, std::vector<double> z, TailPolicy policy = TailPolicy::zero_remainder)
        : kind(k), zeros(std::move(z)), tail_policy(policy) {
        N = detail::window_from_size(zeros.size(), "zeros");
        detail::require_finite(zeros, "zeros");
        for (int n = -N; n < N; ++n)
            if (!(zeros[n + N] < zeros[n + N + 1]))
                throw Error(ErrorCode::admissibility,
                            "product zeros are not strictly increasing at n = " + std::to_string(n), n);
        if (tail_policy == TailPolicy::asymptotic) {
            std::vector<double> r(zeros.size());
            for (int n = -N; n <= N; ++n) r[n + N] = zeros[n + N] - pi * (n + shift());
            tail = detail::fit_tail(r, N, shift());
        }
    }

    static CanonicalProduct sine(const SpectralData& d) {
        CanonicalProduct p(ProductKind::sine_type, d.lambda, d.tail_policy);
        p.tail = d.lambda_tail;
        return p;
    }
    static CanonicalProduct cosine(const SpectralData& d) {
        CanonicalProduct p(ProductKind::cosine_type, d.mu, d.tail_policy);
        p.tail = d.mu_tail;
        return p;
    }

    double shift() const { return kind == ProductKind::sine_type ? 0.0 : 0.5; }
    double node(long n) const { return pi * (n + shift()); }
    double remainder(long n) const {
        if (std::abs(n) <= N) return zeros[n + N] - node(n);
        return tail_policy == TailPolicy::asymptotic ? tail(n + shift()) : 0.0;
    }
    double zero(long n) const { return node(n) + remainder(n); }
};

namespace detail {

struct SignedLog {
    double log_abs = 0.0;
    int sign = 1;
    void mul(double factor) {
        if (factor < 0) sign = -sign;
        log_abs += std::log(std::abs(factor));
    }
    double value() const { return sign * std::exp(log_abs); }
};

// prod over k != skip of (1 + r_k / (node_k - z)), with the closed-form tail under the asymptotic policy.
// Returns nullopt-like sign 0 if some factor vanishes.
inline SignedLog ratio_product(const CanonicalProduct& p, double z, std::optional<long> skip,
                               double* min_factor = nullptr) {
    SignedLog acc;
    long lo = -p.N, hi = p.N;
    const bool asym = p.tail_policy == TailPolicy::asymptotic && !p.tail.is_zero();
    if (asym) {
        hi = std::max<long>(p.extended, p.N);
        lo = p.kind == ProductKind::sine_type ? -hi : -hi - 1;  // symmetric set of nodes
    }
    double fmin = 1e300;
    for (long k = lo; k <= hi; ++k) {
        if (skip && k == *skip) continue;
        double f = 1.0 + p.remainder(k) / (p.node(k) - z);
        fmin = std::min(fmin, f);
        if (f == 0.0) {
            acc.sign = 0;
            break;
        }
        acc.mul(f);
    }
    if (asym && acc.sign != 0) {
        // paired first-order remainder: sum_{nu > K} 2 pi c / (pi^2 nu^2 - z^2) ~ (c/(pi w)) log((K'+w)/(K'-w))
        const double Kp = hi + p.shift() + 0.5;
        const double w = z / pi;
        double s = std::abs(w) < 1e-8 * Kp ? 2.0 / Kp : std::log((Kp + w) / (Kp - w)) / w;
        acc.log_abs += p.tail.c1 / pi * s;
    }
    if (min_factor) *min_factor = fmin;
    return acc;
}

}  // namespace detail

inline double eval_product(const CanonicalProduct& p, double z) {
    for (double zz : p.zeros)
        if (zz == z) return 0.0;
    // nearest node absorbs the vanishing trigonometric factor
    const long ns = std::lround(z / pi - p.shift());
    const double e = z - p.node(ns);
    const double sgn = (ns % 2 == 0) ? 1.0 : -1.0;
    const double sinc = e == 0.0 ? 1.0 : std::sin(e) / e;
    // sine: sin z/(node - z) = -(-1)^n sinc(e);  cosine: cos z/(node - z) = (-1)^n sinc(e)
    const double lead = (p.kind == ProductKind::sine_type ? -sgn : sgn) * sinc;
    const double zeta = p.zero(ns);
    if (zeta == z) return 0.0;
    auto rest = detail::ratio_product(p, z, ns);
    if (rest.sign == 0) return 0.0;
    return lead * (zeta - z) * rest.value();
}

struct GammaDelta {
    int N = 0;
    std::vector<double> gamma;
    std::vector<double> delta;
};

// gamma_n = (-1)^n S'(lambda_n) = (sin rho_n / rho_n) prod_{k != n} (lambda_k - lambda_n)/(pi k - lambda_n)
inline std::vector<double> sdot_at_zeros(const CanonicalProduct& p) {
    if (p.kind != ProductKind::sine_type) throw std::invalid_argument("sdot_at_zeros needs a sine-type product");
    std::vector<double> g(2 * p.N + 1);
    for (long n = -p.N; n <= p.N; ++n) {
        const double r = p.remainder(n);
        double fmin = 1;
        auto acc = detail::ratio_product(p, p.zero(n), n, &fmin);
        if (acc.sign <= 0 || fmin <= 0)
            throw Error(ErrorCode::admissibility, "separation violated in S'(lambda_n) at n = " + std::to_string(n), n);
        const double sinc = r == 0.0 ? 1.0 : std::sin(r) / r;
        g[n + p.N] = sinc * acc.value();
    }
    return g;
}

// delta_n = (-1)^n C(lambda_n)
inline std::vector<double> c_at_zeros(const CanonicalProduct& pc, const std::vector<double>& lambda) {
    if (pc.kind != ProductKind::cosine_type) throw std::invalid_argument("c_at_zeros needs a cosine-type product");
    if (lambda.size() != pc.zeros.size()) throw std::invalid_argument("lambda and mu windows differ");
    const int N = pc.N;
    std::vector<double> d(2 * N + 1);
    for (long n = -N; n <= N; ++n) {
        const double l = lambda[n + N];
        if (!(pc.zero(n - 1) < l && l < pc.zero(n)))
            throw Error(ErrorCode::admissibility, "interlacing violated at n = " + std::to_string(n), n);
        double v = ((n % 2 == 0) ? 1.0 : -1.0) * eval_product(pc, l);
        if (!(v > 0))
            throw Error(ErrorCode::admissibility, "(-1)^n C(lambda_n) is not positive at n = " + std::to_string(n), n);
        d[n + N] = v;
    }
    return d;
}

inline GammaDelta gamma_delta_via_products(const SpectralData& d) {
    return {d.N, sdot_at_zeros(CanonicalProduct::sine(d)), c_at_zeros(CanonicalProduct::cosine(d), d.lambda)};
}

inline NormingData norming_from_two_spectra(const SpectralData& d) {
    GammaDelta gd = gamma_delta_via_products(d);
    std::vector<double> a(gd.gamma.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 / (gd.gamma[i] * gd.delta[i]);
    return NormingData(d.lambda, std::move(a), d.tail_policy);
}

// ---------------------------------------------------------------------------
// Zero-to-kernel problem: given f, find g with zeros of
//   G_g(z) = sin z + int_0^1 g(t) e^{iz(1-2t)} dt
// exactly at pi n + fhat(n). Equivalently H(f,g) = s(f) + g + sum_k (M^k g) * f^{<k>}/k! = 0.

struct ZeroKernelResult {
    GridFunction g;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;  // residual after each accepted step (index 0: seed)
    bool within_budget = true;    // ||f|| <= 2
};

namespace detail {

inline int coefficient_band(const std::vector<cplx>& c) {
    const int M = static_cast<int>(c.size());
    double mx = 0;
    for (const auto& x : c) mx = std::max(mx, std::abs(x));
    int band = 0;
    for (int n = -M / 2; n < M / 2; ++n)
        if (std::abs(c[n + M / 2]) > 1e-14 * mx) band = std::max(band, std::abs(n));
    return band;
}

// mu_k(q) = int_0^1 (i(1-2t))^k e^{-2 pi i q t} dt, q = -Q..Q, k = 0..K
inline std::vector<std::vector<cplx>> multiplier_moments(int Q, int K) {
    quad::Rule rule = quad::composite(0.0, 1.0, std::max(16, 2 * Q + 8), 12);
    std::vector<std::vector<cplx>> mom(K + 1, std::vector<cplx>(2 * Q + 1));
    const std::size_t P = rule.nodes.size();
    std::vector<cplx> term(P);
    for (int q = -Q; q <= Q; ++q) {
        for (std::size_t j = 0; j < P; ++j) term[j] = rule.weights[j] * std::polar(1.0, -2 * pi * q * rule.nodes[j]);
        for (int k = 0; k <= K; ++k) {
            cplx s = 0;
            for (std::size_t j = 0; j < P; ++j) {
                s += term[j];
                term[j] *= cplx(0, 1 - 2 * rule.nodes[j]);
            }
            mom[k][q + Q] = s;
        }
    }
    return mom;
}

}  // namespace detail

inline ZeroKernelResult solve_zero_to_kernel(const GridFunction& f, double tol = 1e-12, int max_iter = 25) {
    if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
    const int M = f.m();
    auto fc = f.coefficients();
    const int B = detail::coefficient_band(fc);
    ZeroKernelResult res;
    res.within_budget = f.norm() <= 2.0;
    if (B == 0 && std::abs(fc[M / 2]) == 0.0) {
        res.g = GridFunction::zero(M);
        return res;
    }
    if (B >= M / 2 - 1) throw std::invalid_argument("f occupies the whole grid band; refine the grid");
    const int K = series_cutoff(f.norm());
    const int D = 2 * B + 1;
    auto mom = detail::multiplier_moments(2 * B, K);

    Eigen::VectorXcd s(D);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(D, D);
    for (int n = -B; n <= B; ++n) {
        const cplx fn = fc[n + M / 2];
        // s(f)^(n) = sum_k (-1)^k fn^{2k+1}/(2k+1)!
        cplx term = fn, acc = 0;
        for (int k = 0; k <= K; ++k) {
            acc += term;
            term *= -fn * fn / double((2 * k + 2) * (2 * k + 3));
        }
        s(n + B) = acc;
        cplx c = 1;
        for (int k = 1; k <= K; ++k) {
            c *= fn / double(k);
            for (int p = -B; p <= B; ++p) A(n + B, p + B) += c * mom[k][n - p + 2 * B];
        }
    }

    auto residual = [&](const Eigen::VectorXcd& g) { return (s + A * g).norm(); };
    Eigen::VectorXcd g = -s;
    double r = residual(g);
    res.history.push_back(r);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    int it = 0;
    while (r > tol && it < max_iter) {
        Eigen::VectorXcd step = -lu.solve(s + A * g);
        double t = 1.0;
        Eigen::VectorXcd trial = g + step;
        double rt = residual(trial);
        for (int halv = 0; halv < 8 && rt > (1 - 1e-4 * t) * r; ++halv) {
            t *= 0.5;
            trial = g + t * step;
            rt = residual(trial);
        }
        ++it;
        if (!(rt < r)) break;
        g = trial;
        r = rt;
        res.history.push_back(r);
    }
    res.iterations = it;
    res.residual = r;
    if (!(r <= tol))
        throw Error(ErrorCode::solver,
                    "zero-to-kernel Newton iteration did not converge; final residual " + std::to_string(r) +
                        (res.within_budget ? "" : " (||f|| > 2, outside the convergence budget)"));
    std::vector<cplx> gc(D);
    for (int i = 0; i < D; ++i) gc[i] = g(i);
    res.g = GridFunction::from_coefficients(M, B, gc);
    return res;
}

// G_g(z) = sin z + int_0^1 g(t) e^{iz(1-2t)} dt for a band-limited g, in closed form per mode.
inline cplx kernel_characteristic(const GridFunction& g, double z, bool cosine = false) {
    const int M = g.m();
    auto c = g.coefficients();
    cplx s = cosine ? std::cos(z) : std::sin(z);
    const cplx ez = std::polar(1.0, z);
    for (int p = -M / 2 + 1; p < M / 2; ++p) {
        if (c[p + M / 2] == cplx(0.0)) continue;
        const double a = 2 * pi * p - 2 * z;
        cplx I = std::abs(a) < 1e-12 ? cplx(1.0) : (std::polar(1.0, a) - 1.0) / cplx(0, a);
        s += c[p + M / 2] * ez * I;
    }
    return s;
}

struct KernelPair {
    GridFunction r1;       // S(z) = sin z + int r1(t) e^{iz(1-2t)} dt
    GridFunction g_mu;     // r2(t) = i e^{i pi t} g_mu(t), C(z) = cos z + int r2(t) e^{iz(1-2t)} dt
    cplx r2(double t) const { return cplx(0, 1) * std::polar(1.0, pi * t) * TrigInterpolant(g_mu)(t); }
};

// Both densities from the two spectra (window data, zero remainders beyond N).
// The cosine-type problem is reduced to the sine-type one by z = w + pi/2:
// cos z + int r2 e^{iz(1-2t)} = -(sin w + int g e^{iw(1-2t)}) with g = -i e^{-i pi t} r2.
inline KernelPair kernels_from_spectra(const SpectralData& d, int m, double tol = 1e-12) {
    const int N = d.N;
    std::vector<cplx> fl(2 * N + 1), fm(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        fl[n + N] = d.lambda[n + N] - pi * n;
        fm[n + N] = d.mu[n + N] - pi * (n + 0.5);
    }
    GridFunction f_lambda = GridFunction::from_coefficients(m, N, fl);
    GridFunction f_mu = GridFunction::from_coefficients(m, N, fm);
    return {solve_zero_to_kernel(f_lambda, tol).g, solve_zero_to_kernel(f_mu, tol).g};
}

inline GammaDelta gamma_delta_via_fourier(const SpectralData& d, int m = 0, double tol = 1e-12) {
    const int N = d.N;
    if (m == 0) {
        m = 16;
        while (m < 4 * (N + 1)) m *= 2;
    }
    KernelPair kp = kernels_from_spectra(d, m, tol);
    std::vector<cplx> fl(2 * N + 1);
    for (int n = -N; n <= N; ++n) fl[n + N] = d.lambda[n + N] - pi * n;
    GridFunction f_lambda = GridFunction::from_coefficients(m, N, fl);

    TrigInterpolant r1(kp.r1), gm(kp.g_mu);
    auto g_gamma = [&](double t) { return cplx(0, 1 - 2 * t) * r1(t); };
    auto g_delta = [&](double t) { return cplx(0, 1) * std::polar(1.0, pi * t) * gm(t); };
    GridFunction hg = map_Psi(f_lambda, g_gamma);
    GridFunction hd = map_Psi(f_lambda, g_delta);
    auto cg = hg.coefficients(), cd = hd.coefficients();

    GammaDelta out{N, std::vector<double>(2 * N + 1), std::vector<double>(2 * N + 1)};
    for (int n = -N; n <= N; ++n) {
        const double c = std::cos(d.lambda[n + N] - pi * n);
        out.gamma[n + N] = c + cg[n + m / 2].real();
        out.delta[n + N] = c + cd[n + m / 2].real();
    }
    return out;
}

// Numerical constant of the uniform bound: K = max over x >= -1 + 2h/pi of |(log(1+x) - x)/x^2|.
inline double log_bound_constant(double h) {
    const double x0 = -1 + 2 * h / pi;
    // |(log(1+x) - x)/x^2| is decreasing in x on (-1, inf), so the max sits at x0
    if (std::abs(x0) < 1e-6) return 0.5;
    return std::abs((std::log1p(x0) - x0) / (x0 * x0));
}

inline double log_gamma_delta_bound(double h, double r) {
    const double K = log_bound_constant(h);
    return (std::sqrt(3.0) * r + 4 * K * pi * pi * r * r) / 3.0;
}

}  // namespace akns
