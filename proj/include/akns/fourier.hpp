#pragma once

#include "akns/core.hpp"
#include "akns/quadrature.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace akns {

namespace detail {

inline void fft_forward(const std::vector<cplx>& in, std::vector<cplx>& out) {
    Eigen::FFT<double> fft;
    out.resize(in.size());
    fft.fwd(out.data(), in.data(), static_cast<int>(in.size()));
}

inline void fft_inverse(const std::vector<cplx>& in, std::vector<cplx>& out) {
    Eigen::FFT<double> fft;
    out.resize(in.size());
    fft.inv(out.data(), in.data(), static_cast<int>(in.size()));  // includes 1/m
}

inline void require_grid(int m) {
    if (!is_power_of_two(m) || m < 2) throw std::invalid_argument("grid resolution must be a power of two >= 2");
}

}  // namespace detail

// Complex samples at x_j = j/m, j = 0..m-1, of a 1-periodic function.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::vector<cplx> values) : v_(std::move(values)) {
        detail::require_grid(static_cast<int>(v_.size()));
    }

    static GridFunction zero(int m) { return GridFunction(std::vector<cplx>(m)); }

    template <class F>
    static GridFunction sample(int m, const F& f) {
        std::vector<cplx> v(m);
        for (int j = 0; j < m; ++j) v[j] = f(double(j) / m);
        return GridFunction(std::move(v));
    }

    // c[n + band] is the coefficient of e^{2 pi i n x}, |n| <= band < m/2
    static GridFunction from_coefficients(int m, int band, const std::vector<cplx>& c) {
        detail::require_grid(m);
        if (band >= m / 2 || c.size() != std::size_t(2 * band + 1))
            throw std::invalid_argument("coefficient band does not fit the grid");
        std::vector<cplx> coef(m), v;
        for (int n = -band; n <= band; ++n) coef[(n + m) % m] = c[n + band];
        detail::fft_inverse(coef, v);
        for (auto& x : v) x *= double(m);
        return GridFunction(std::move(v));
    }

    int m() const { return static_cast<int>(v_.size()); }
    const std::vector<cplx>& values() const { return v_; }
    cplx operator[](int j) const { return v_[j]; }

    // all m discrete coefficients, ordered n = -m/2 .. m/2-1
    std::vector<cplx> coefficients() const {
        const int M = m();
        std::vector<cplx> coef;
        detail::fft_forward(v_, coef);
        std::vector<cplx> c(M);
        for (int n = -M / 2; n < M / 2; ++n) c[n + M / 2] = coef[(n + M) % M] / double(M);
        return c;
    }

    cplx coefficient(int n) const {
        const int M = m();
        if (n < -M / 2 || n >= M / 2) return 0.0;
        return coefficients()[n + M / 2];
    }

    // trigonometric interpolant; the Nyquist mode is split as a cosine
    cplx operator()(double t) const {
        const int M = m();
        auto c = coefficients();
        cplx s = c[0] * std::cos(pi * M * t);
        for (int n = -M / 2 + 1; n < M / 2; ++n) s += c[n + M / 2] * std::polar(1.0, 2 * pi * n * t);
        return s;
    }

    double norm() const {
        double s = 0;
        for (const auto& x : v_) s += std::norm(x);
        return std::sqrt(s / m());
    }

    GridFunction& operator+=(const GridFunction& o) {
        check_same(o);
        for (int j = 0; j < m(); ++j) v_[j] += o.v_[j];
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) {
        a.check_same(b);
        for (int j = 0; j < a.m(); ++j) a.v_[j] -= b.v_[j];
        return a;
    }
    friend GridFunction operator*(cplx s, GridFunction a) {
        for (auto& x : a.v_) x *= s;
        return a;
    }

    void check_same(const GridFunction& o) const {
        if (o.m() != m()) throw std::invalid_argument("grid functions of different resolution");
    }

private:
    std::vector<cplx> v_;
};

inline GridFunction conv(const GridFunction& f, const GridFunction& g) {
    f.check_same(g);
    const int M = f.m();
    std::vector<cplx> a, b, out;
    detail::fft_forward(f.values(), a);
    detail::fft_forward(g.values(), b);
    for (int k = 0; k < M; ++k) a[k] *= b[k] / double(M);
    detail::fft_inverse(a, out);
    return GridFunction(std::move(out));
}

// Smallest K with sum_{k>K} (2 norm)^k / k! < 1e-12, capped at 60.
inline int series_cutoff(double norm_f) {
    const double x = 2 * norm_f;
    for (int K = 1; K < 60; ++K) {
        double term = 1;
        for (int k = 1; k <= K + 1; ++k) term *= x / k;
        double tail = 0;
        for (int k = K + 1; k < K + 400 && term > 1e-300; ++k) {
            tail += term;
            term *= x / (k + 1);
        }
        if (tail < 1e-12) return K;
    }
    return 60;
}

namespace detail {

// Raw DFT spectrum (unnormalised, FFT order) of the m samples.
inline std::vector<cplx> spectrum(const GridFunction& f) {
    std::vector<cplx> s;
    fft_forward(f.values(), s);
    for (auto& x : s) x /= double(f.m());
    return s;
}

inline std::vector<cplx> synth(const std::vector<cplx>& coef_fft_order) {
    std::vector<cplx> v;
    fft_inverse(coef_fft_order, v);
    for (auto& x : v) x *= double(v.size());
    return v;
}

// sum_{k=k0}^{K} (2 i s)^k / k! * synth(fhat^k * ghat) at s_j = j/m, j = 0..m (m+1 samples,
// endpoint s = 1 taken from the periodic value at 0). Shared by g(f) and Phi(f,g).
inline std::vector<cplx> exp_series(const std::vector<cplx>& fhat, const std::vector<cplx>& ghat, int k0,
                                    int K) {
    const int M = static_cast<int>(fhat.size());
    std::vector<cplx> acc(M + 1), powk(M + 1, 1.0), coef = ghat;
    for (int k = 0; k <= K; ++k) {
        if (k >= k0) {
            auto vals = synth(coef);
            for (int j = 0; j <= M; ++j) acc[j] += powk[j] * vals[j % M];
        }
        for (int j = 0; j <= M; ++j) powk[j] *= cplx(0, 2.0 * j / M) / double(k + 1);
        for (int n = 0; n < M; ++n) coef[n] *= fhat[n];
    }
    return acc;
}

inline int resolve_cutoff(const GridFunction& f, int k_max) {
    if (k_max < 0) return series_cutoff(f.norm());
    if (k_max < 1) throw std::invalid_argument("series cutoff k_max must be >= 1");
    return k_max;
}

inline std::vector<cplx> g_of_f_closed(const GridFunction& f, int k_max) {
    auto fh = spectrum(f);
    std::vector<cplx> ones(f.m(), 1.0);
    return exp_series(fh, ones, 1, resolve_cutoff(f, k_max));
}

inline std::vector<cplx> phi_closed(const GridFunction& f, const GridFunction& g, int k_max) {
    f.check_same(g);
    return exp_series(spectrum(f), spectrum(g), 0, resolve_cutoff(f, k_max));
}

}  // namespace detail

// g(f)(s) = sum_{k>=1} (2is)^k/k! f^{<k>}(s); k_max < 0 selects the adaptive cutoff.
inline GridFunction map_g_of_f(const GridFunction& f, int k_max = -1) {
    auto v = detail::g_of_f_closed(f, k_max);
    v.pop_back();
    return GridFunction(std::move(v));
}

inline GridFunction map_Phi(const GridFunction& f, const GridFunction& g, int k_max = -1) {
    auto v = detail::phi_closed(f, g, k_max);
    v.pop_back();
    return GridFunction(std::move(v));
}

template <class G>
concept ScalarFunction = requires(const G& g, double t) {
    { g(t) } -> std::convertible_to<cplx>;
};

// Evaluates the trigonometric interpolant of a GridFunction off the grid.
class TrigInterpolant {
public:
    explicit TrigInterpolant(const GridFunction& f) : m_(f.m()), c_(f.coefficients()) {}
    cplx operator()(double t) const {
        cplx s = c_[0] * std::cos(pi * m_ * t);
        const cplx w = std::polar(1.0, 2 * pi * t);
        cplx e = std::polar(1.0, 2 * pi * (-m_ / 2 + 1) * t);
        for (int n = -m_ / 2 + 1; n < m_ / 2; ++n) {
            s += c_[n + m_ / 2] * e;
            e *= w;
        }
        return s;
    }

private:
    int m_;
    std::vector<cplx> c_;
};

namespace detail {

// out[n + M/2] = sum_{k>=k0} fhat(n)^k/k! * int_0^1 (i(1-2t))^k g(t) e^{-2 pi i n t} dt,
// integrated with composite Gauss-Legendre (2M panels, 10 points each).
template <ScalarFunction G>
std::vector<cplx> psi_coefficients(const std::vector<cplx>& fc, const G& g, int K, bool with_k0) {
    const int M = static_cast<int>(fc.size());
    quad::Rule rule = quad::composite(0.0, 1.0, 2 * M, 10);
    const std::size_t P = rule.nodes.size();
    std::vector<cplx> gv(P);
    for (std::size_t q = 0; q < P; ++q) gv[q] = g(rule.nodes[q]) * rule.weights[q];

    std::vector<cplx> out(M), term(P);
    for (int n = -M / 2 + 1; n < M / 2; ++n) {
        const cplx fn = fc[n + M / 2];
        if (fn == cplx(0.0) && !with_k0) continue;
        cplx acc = 0;
        for (std::size_t q = 0; q < P; ++q) {
            term[q] = gv[q] * std::polar(1.0, -2 * pi * n * rule.nodes[q]);
            if (with_k0) acc += term[q];
        }
        if (fn != cplx(0.0)) {
            cplx fk = 1;
            for (int k = 1; k <= K; ++k) {
                fk *= fn / double(k);
                cplx s = 0;
                for (std::size_t q = 0; q < P; ++q) {
                    term[q] *= cplx(0, 1.0 - 2.0 * rule.nodes[q]);
                    s += term[q];
                }
                acc += fk * s;
            }
        }
        out[n + M / 2] = acc;
    }
    return out;
}

inline GridFunction from_centered(std::vector<cplx> c) {
    const int M = static_cast<int>(c.size());
    std::vector<cplx> coef(M);
    for (int n = -M / 2; n < M / 2; ++n) coef[(n + M) % M] = c[n + M / 2];
    return GridFunction(synth(coef));
}

}  // namespace detail

// Psi(f,g) = sum_k f^{<k>} * (M^k g) / k!, M = multiplication by i(1-2t).
// Here g is any function on [0,1] (it need not be periodic), so the moments of M^k g are
// integrated with composite Gauss-Legendre quadrature rather than from grid samples.
template <ScalarFunction G>
GridFunction map_Psi(const GridFunction& f, const G& g, int k_max = -1) {
    const int K = detail::resolve_cutoff(f, k_max);
    return detail::from_centered(detail::psi_coefficients(f.coefficients(), g, K, true));
}

// Grid-function overload: the k = 0 term is g itself, exactly.
inline GridFunction map_Psi(const GridFunction& f, const GridFunction& g, int k_max = -1) {
    f.check_same(g);
    const int K = detail::resolve_cutoff(f, k_max);
    auto c = detail::psi_coefficients(f.coefficients(), TrigInterpolant(g), K, false);
    auto gc = g.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += gc[i];
    return detail::from_centered(std::move(c));
}

// h(s) on s = j/m, j = 0..m. Index 0 holds the right limit h(0+).
struct ScalarKernel {
    int m = 0;
    std::vector<cplx> plus;

    cplx at_zero_plus() const { return plus[0]; }

    // j in [-m, m]; j = 0 gives the symmetric (principal value) value Re h(0+)
    cplx operator()(int j) const {
        if (j > 0) return plus[j];
        if (j < 0) return std::conj(plus[-j]);
        return plus[0].real();
    }

    GridFunction h_plus() const { return GridFunction(std::vector<cplx>(plus.begin(), plus.end() - 1)); }
};

namespace detail {

// T1(s) = sum_{|n|>N} e^{2 pi i n s}/n, T2(s) = sum_{|n|>N} e^{2 pi i n s}/n^2 for s in [0,1]
// (one-sided limits at the endpoints: T1(0+) uses s -> 0+, T1 at s = 1 uses s -> 1-).
inline std::pair<cplx, cplx> harmonic_tails(double s, int N, bool at_zero_plus_side) {
    cplx t1 = cplx(0, pi * (1 - 2 * s));
    if (s == 0 && !at_zero_plus_side) t1 = 0;
    cplx t2 = 2 * pi * pi * (s * s - s + 1.0 / 6.0);
    for (int n = 1; n <= N; ++n) {
        cplx e = std::polar(1.0, 2 * pi * n * s);
        t1 -= (e - std::conj(e)) / double(n);
        t2 -= (e + std::conj(e)) / double(n * n);
    }
    return {t1, t2};
}

}  // namespace detail

inline ScalarKernel build_h(const NormingData& d, int m) {
    detail::require_grid(m);
    if (2 * d.N + 1 > m) throw std::invalid_argument("spectral window 2N+1 exceeds the grid bandwidth m");
    const int N = d.N;
    std::vector<cplx> fc(2 * N + 1), gc(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        fc[n + N] = d.lambda[n + N] - pi * n;
        gc[n + N] = d.alpha[n + N] - 1.0;
    }
    GridFunction f = GridFunction::from_coefficients(m, N, fc);
    GridFunction g = GridFunction::from_coefficients(m, N, gc);
    auto a = detail::g_of_f_closed(f, -1);
    auto b = detail::phi_closed(f, g, -1);
    ScalarKernel h{m, std::vector<cplx>(m + 1)};
    for (int j = 0; j <= m; ++j) h.plus[j] = a[j] + b[j];

    if (d.tail_policy == TailPolicy::asymptotic) {
        // |n| > N terms, expanded to second order in 1/n:
        // alpha e^{2 i lambda s} - e^{2 pi i n s} ~ e^{2 pi i n s} (beta + 2 i rho s + 2 i beta rho s - 2 rho^2 s^2)
        const double c = d.lambda_tail.c1, dd = d.lambda_tail.c2;
        const double A = d.beta_tail.c1, B = d.beta_tail.c2;
        for (int j = 0; j <= m; ++j) {
            double s = double(j) / m;
            auto [t1, t2] = detail::harmonic_tails(s, N, true);
            cplx k1 = A + cplx(0, 2 * c * s);
            cplx k2 = B + cplx(0, 2 * dd * s) + cplx(0, 2 * A * c * s) - 2 * c * c * s * s;
            h.plus[j] += k1 * t1 + k2 * t2;
        }
    }
    return h;
}

// H(s) = Re h(s) I + Im h(s) J on s = j/m, j = -m..m.
struct MatrixKernel {
    int m = 0;
    std::vector<Mat2> samples;  // index j + m
    Mat2 zero_plus = Mat2::Zero();

    const Mat2& operator()(int j) const { return samples[j + m]; }
    const Mat2& at_zero_plus() const { return zero_plus; }
};

inline Mat2 scalar_to_matrix(cplx z) { return z.real() * Mat2::Identity() + z.imag() * pauli::J(); }

inline MatrixKernel build_H(const ScalarKernel& h) {
    MatrixKernel H{h.m, std::vector<Mat2>(2 * h.m + 1)};
    for (int j = -h.m; j <= h.m; ++j) H.samples[j + h.m] = scalar_to_matrix(h(j));
    H.zero_plus = scalar_to_matrix(h.at_zero_plus());
    return H;
}

// Every other sample of H: the same kernel on the grid of resolution m/2.
inline MatrixKernel coarsen(const MatrixKernel& H) {
    if (H.m % 2) throw std::invalid_argument("cannot coarsen an odd grid");
    MatrixKernel C{H.m / 2, std::vector<Mat2>(H.m + 1)};
    for (int j = -C.m; j <= C.m; ++j) C.samples[j + C.m] = H(2 * j);
    C.zero_plus = H.zero_plus;
    return C;
}

// F(x,t) on x_p = p/mF, t_q = q/mF, 0 <= p,q <= mF, with mF = H.m / 2 so that the
// half arguments (x -+ t)/2 fall on samples of H.
struct GLMKernel {
    int m = 0;
    std::vector<Mat2> values;       // (m+1)^2, row-major in (p, q)
    std::vector<Mat2> diag_lower;   // F(x, t -> x-): first argument H(0+)
    std::vector<Mat2> diag_upper;   // F(s -> t-, t): first argument H(0-) = H(0+)^T

    const Mat2& operator()(int p, int q) const { return values[p * (m + 1) + q]; }
};

inline GLMKernel build_F(const MatrixKernel& H) {
    if (H.m % 2) throw std::invalid_argument("build_F needs an even kernel resolution");
    const int mF = H.m / 2;
    const Mat2 s3 = pauli::sigma3();
    GLMKernel F{mF, std::vector<Mat2>((mF + 1) * (mF + 1)), std::vector<Mat2>(mF + 1),
                std::vector<Mat2>(mF + 1)};
    for (int p = 0; p <= mF; ++p) {
        for (int q = 0; q <= mF; ++q) F.values[p * (mF + 1) + q] = 0.5 * (H(p - q) - H(p + q) * s3);
        // t -> x-: (x-t)/2 -> 0+, and at x = 0 also (x+t)/2 -> 0+
        const Mat2 Hsum = p == 0 ? H.at_zero_plus() : H(2 * p);
        F.diag_lower[p] = 0.5 * (H.at_zero_plus() - Hsum * s3);
        F.diag_upper[p] = 0.5 * (H.at_zero_plus().transpose() - Hsum * s3);
    }
    // s -> 0+ at t = 0: both half arguments approach 0 from above
    F.values[0] = F.diag_lower[0];
    return F;
}

}  // namespace akns
