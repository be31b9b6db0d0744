#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace akns {

inline constexpr double pi = std::numbers::pi;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2d;

namespace pauli {
inline Mat2 identity() { return Mat2::Identity(); }
inline Mat2 sigma1() { Mat2 s; s << 0, 1, 1, 0; return s; }
inline Eigen::Matrix2cd sigma2() {
    Eigen::Matrix2cd s;
    s << 0.0, cplx(0, -1), cplx(0, 1), 0.0;
    return s;
}
inline Mat2 sigma3() { Mat2 s; s << 1, 0, 0, -1; return s; }
// J = i*sigma2, the real rotation generator
inline Mat2 J() { Mat2 s; s << 0, 1, -1, 0; return s; }
}  // namespace pauli

// Exit codes double as machine-readable error categories.
enum class ErrorCode { admissibility = 2, positivity = 3, solver = 4, io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<long> index = std::nullopt)
        : std::runtime_error(what), code_(code), index_(index) {}
    ErrorCode code() const noexcept { return code_; }
    std::optional<long> index() const noexcept { return index_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
    std::optional<long> index_;
};

// How a stored window -N..N is continued to |n| > N.
//   zero_remainder: remainders vanish exactly (lambda_n = pi n, alpha_n = 1).
//   asymptotic:     remainders follow c1/nu + c2/nu^2 fitted on the outer half of the window.
enum class TailPolicy { zero_remainder, asymptotic };

inline std::string to_string(TailPolicy p) {
    return p == TailPolicy::zero_remainder ? "zero_remainder" : "asymptotic";
}

inline TailPolicy parse_tail_policy(const std::string& s) {
    if (s == "zero_remainder" || s == "zero") return TailPolicy::zero_remainder;
    if (s == "asymptotic") return TailPolicy::asymptotic;
    throw std::invalid_argument("unknown tail policy '" + s + "'");
}

struct TailModel {
    double c1 = 0.0;
    double c2 = 0.0;
    double operator()(double nu) const { return c1 / nu + c2 / (nu * nu); }
    bool is_zero() const { return c1 == 0.0 && c2 == 0.0; }
};

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw std::invalid_argument(std::string(name) + " has a non-finite entry at position " +
                                        std::to_string(i));
}

inline int window_from_size(std::size_t size, const char* name) {
    if (size == 0 || size % 2 == 0)
        throw std::invalid_argument(std::string(name) + " must have odd length 2N+1");
    return static_cast<int>((size - 1) / 2);
}

// Least squares for r(nu) ~ c1/nu + c2/nu^2 using samples with N/2 < |nu|.
// `shift` is 0 for integer-indexed sequences and 0.5 for the mu family.
inline TailModel fit_tail(const std::vector<double>& rem, int N, double shift) {
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    int used = 0;
    for (int n = -N; n <= N; ++n) {
        double nu = n + shift;
        if (std::abs(nu) <= 0.5 * N || std::abs(nu) < 1.0) continue;
        Eigen::Vector2d phi(1.0 / nu, 1.0 / (nu * nu));
        A += phi * phi.transpose();
        b += phi * rem[n + N];
        ++used;
    }
    if (used < 4) return {};
    Eigen::Vector2d c = A.ldlt().solve(b);
    if (!c.allFinite()) return {};
    return {c(0), c(1)};
}

}  // namespace detail

// Two interlacing spectra of D1 (lambda) and D2 (mu), indexed n = -N..N.
struct SpectralData {
    int N = 0;
    std::vector<double> lambda;
    std::vector<double> mu;
    TailPolicy tail_policy = TailPolicy::zero_remainder;
    TailModel lambda_tail;
    TailModel mu_tail;

    SpectralData() = default;
    SpectralData(std::vector<double> lam, std::vector<double> m,
                 TailPolicy policy = TailPolicy::zero_remainder)
        : lambda(std::move(lam)), mu(std::move(m)), tail_policy(policy) {
        if (lambda.size() != mu.size())
            throw std::invalid_argument("lambda and mu must have the same length");
        N = detail::window_from_size(lambda.size(), "lambda");
        detail::require_finite(lambda, "lambda");
        detail::require_finite(mu, "mu");
        if (tail_policy == TailPolicy::asymptotic) {
            std::vector<double> r1(lambda.size()), r2(mu.size());
            for (int n = -N; n <= N; ++n) {
                r1[n + N] = lambda[n + N] - pi * n;
                r2[n + N] = mu[n + N] - pi * (n + 0.5);
            }
            lambda_tail = detail::fit_tail(r1, N, 0.0);
            mu_tail = detail::fit_tail(r2, N, 0.5);
        }
    }

    static SpectralData unperturbed(int N) {
        std::vector<double> l(2 * N + 1), m(2 * N + 1);
        for (int n = -N; n <= N; ++n) {
            l[n + N] = pi * n;
            m[n + N] = pi * (n + 0.5);
        }
        return SpectralData(std::move(l), std::move(m));
    }

    double rho_lambda(long n) const {
        if (std::abs(n) <= N) return lambda[n + N] - pi * n;
        return tail_policy == TailPolicy::asymptotic ? lambda_tail(double(n)) : 0.0;
    }
    double rho_mu(long n) const {
        if (std::abs(n) <= N) return mu[n + N] - pi * (n + 0.5);
        return tail_policy == TailPolicy::asymptotic ? mu_tail(n + 0.5) : 0.0;
    }
    double lambda_at(long n) const { return pi * n + rho_lambda(n); }
    double mu_at(long n) const { return pi * (n + 0.5) + rho_mu(n); }
};

// One spectrum plus norming constants.
struct NormingData {
    int N = 0;
    std::vector<double> lambda;
    std::vector<double> alpha;
    TailPolicy tail_policy = TailPolicy::zero_remainder;
    TailModel lambda_tail;
    TailModel beta_tail;

    NormingData() = default;
    NormingData(std::vector<double> lam, std::vector<double> al,
                TailPolicy policy = TailPolicy::zero_remainder)
        : lambda(std::move(lam)), alpha(std::move(al)), tail_policy(policy) {
        if (lambda.size() != alpha.size())
            throw std::invalid_argument("lambda and alpha must have the same length");
        N = detail::window_from_size(lambda.size(), "lambda");
        detail::require_finite(lambda, "lambda");
        detail::require_finite(alpha, "alpha");
        if (tail_policy == TailPolicy::asymptotic) {
            std::vector<double> r(lambda.size()), b(alpha.size());
            for (int n = -N; n <= N; ++n) {
                r[n + N] = lambda[n + N] - pi * n;
                b[n + N] = alpha[n + N] - 1.0;
            }
            lambda_tail = detail::fit_tail(r, N, 0.0);
            beta_tail = detail::fit_tail(b, N, 0.0);
        }
    }

    static NormingData unperturbed(int N) {
        std::vector<double> l(2 * N + 1), a(2 * N + 1, 1.0);
        for (int n = -N; n <= N; ++n) l[n + N] = pi * n;
        return NormingData(std::move(l), std::move(a));
    }

    double rho_lambda(long n) const {
        if (std::abs(n) <= N) return lambda[n + N] - pi * n;
        return tail_policy == TailPolicy::asymptotic ? lambda_tail(double(n)) : 0.0;
    }
    double beta(long n) const {
        if (std::abs(n) <= N) return alpha[n + N] - 1.0;
        return tail_policy == TailPolicy::asymptotic ? beta_tail(double(n)) : 0.0;
    }
    double lambda_at(long n) const { return pi * n + rho_lambda(n); }
    double alpha_at(long n) const { return 1.0 + beta(n); }
};

struct AdmissibilityParams {
    double h = 0.5;
    double r = 1.0;
    double h_prime = 0.25;
    double r_prime = 2.0;

    void check() const {
        if (!(h > 0 && r > 0 && h_prime > 0 && r_prime > 0))
            throw std::invalid_argument("admissibility parameters must be positive");
    }
};

struct SpectralReport {
    double min_gap = 0.0;
    double rho_norm = 0.0;
    bool member = false;
    std::optional<long> violation_index;
    std::string reason;
};

inline std::vector<double> remainders(const SpectralData& d) {
    std::vector<double> r;
    r.reserve(2 * d.lambda.size());
    for (int n = -d.N; n <= d.N; ++n) {
        r.push_back(d.lambda[n + d.N] - pi * n);
        r.push_back(d.mu[n + d.N] - pi * (n + 0.5));
    }
    return r;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline SpectralReport validate_spectral(const SpectralData& d, const AdmissibilityParams& p) {
    p.check();
    SpectralReport rep;
    const int N = d.N;
    for (int n = -N; n < N; ++n) {
        if (!(d.lambda[n + N] < d.lambda[n + N + 1])) {
            rep.violation_index = n;
            rep.reason = "lambda is not strictly increasing at n = " + std::to_string(n);
            return rep;
        }
    }
    double gap = d.lambda_at(-N) - d.mu_at(-N - 1);
    for (int n = -N; n <= N; ++n) {
        double lo = d.mu[n + N] - d.lambda[n + N];
        double hi = d.lambda_at(n + 1) - d.mu[n + N];
        if (!(lo > 0 && hi > 0)) {
            rep.violation_index = n;
            rep.reason = "interlacing violated at n = " + std::to_string(n);
            return rep;
        }
        gap = std::min({gap, lo, hi});
    }
    rep.min_gap = gap;
    rep.rho_norm = l2_norm(remainders(d));
    rep.member = gap >= p.h && rep.rho_norm <= p.r;
    if (!rep.member)
        rep.reason = gap < p.h ? "separation below h" : "remainder norm exceeds r";
    return rep;
}

struct NormingReport {
    double min_gap = 0.0;    // lambda_{n+1} - lambda_n
    double rho_norm = 0.0;   // ||lambda_n - pi n||
    double min_alpha = 0.0;
    double beta_norm = 0.0;
    bool in_L = false;
    bool in_A = false;
    bool member = false;
    std::optional<long> violation_index;
    std::string reason;
};

inline NormingReport norming_floor_check(const NormingData& d, const AdmissibilityParams& p) {
    p.check();
    NormingReport rep;
    const int N = d.N;
    double gap = d.lambda_at(-N) - d.lambda_at(-N - 1);
    for (int n = -N; n <= N; ++n) {
        double next = d.lambda_at(n + 1);
        if (!(next > d.lambda[n + N])) {
            rep.violation_index = n;
            rep.reason = "lambda is not strictly increasing at n = " + std::to_string(n);
            return rep;
        }
        gap = std::min(gap, next - d.lambda[n + N]);
    }
    double amin = d.alpha[0];
    std::optional<long> amin_at = -N;
    double b2 = 0, r2 = 0;
    for (int n = -N; n <= N; ++n) {
        double a = d.alpha[n + N];
        if (a < amin) { amin = a; amin_at = n; }
        b2 += (a - 1) * (a - 1);
        double r = d.lambda[n + N] - pi * n;
        r2 += r * r;
    }
    rep.min_gap = gap;
    rep.rho_norm = std::sqrt(r2);
    rep.min_alpha = amin;
    rep.beta_norm = std::sqrt(b2);
    rep.in_L = gap >= p.h && rep.rho_norm <= p.r;
    rep.in_A = amin >= p.h_prime && rep.beta_norm <= p.r_prime;
    rep.member = rep.in_L && rep.in_A;
    if (!(amin > 0)) {
        rep.violation_index = amin_at;
        rep.reason = "norming constant floor violated at n = " + std::to_string(*amin_at);
    } else if (!rep.in_A) {
        if (amin < p.h_prime) rep.violation_index = amin_at;
        rep.reason = amin < p.h_prime ? "norming constant below h'" : "beta norm exceeds r'";
    } else if (!rep.in_L) {
        rep.reason = gap < p.h ? "separation below h" : "remainder norm exceeds r";
    }
    return rep;
}

// Element a*1 + x of the unital extension of the pointwise-product algebra on l2(Z),
// with x stored on the window -N..N.
struct AlgebraElement {
    cplx a{1.0, 0.0};
    std::vector<cplx> x;

    int N() const { return detail::window_from_size(x.size(), "x"); }

    static AlgebraElement unit(int N) { return {cplx(1.0), std::vector<cplx>(2 * N + 1)}; }

    double norm() const {
        double s = 0;
        for (const auto& v : x) s += std::norm(v);
        return std::abs(a) + std::sqrt(s);
    }

    friend AlgebraElement operator*(const AlgebraElement& e, const AlgebraElement& f) {
        if (e.x.size() != f.x.size()) throw std::invalid_argument("algebra elements of different size");
        AlgebraElement r{e.a * f.a, std::vector<cplx>(e.x.size())};
        for (std::size_t i = 0; i < e.x.size(); ++i)
            r.x[i] = e.a * f.x[i] + f.a * e.x[i] + e.x[i] * f.x[i];
        return r;
    }

    friend AlgebraElement operator-(const AlgebraElement& e, const AlgebraElement& f) {
        if (e.x.size() != f.x.size()) throw std::invalid_argument("algebra elements of different size");
        AlgebraElement r{e.a - f.a, std::vector<cplx>(e.x.size())};
        for (std::size_t i = 0; i < e.x.size(); ++i) r.x[i] = e.x[i] - f.x[i];
        return r;
    }
};

inline AlgebraElement algebra_invert(const AlgebraElement& e) {
    const int N = e.N();
    if (e.a == cplx(0.0)) throw Error(ErrorCode::solver, "element is not invertible: zero scalar part");
    AlgebraElement r{1.0 / e.a, std::vector<cplx>(e.x.size())};
    for (int n = -N; n <= N; ++n) {
        cplx d = e.a + e.x[n + N];
        if (d == cplx(0.0))
            throw Error(ErrorCode::solver, "element is not invertible: a + x_n = 0 at n = " + std::to_string(n), n);
        r.x[n + N] = -e.x[n + N] / (e.a * d);
    }
    return r;
}

struct QValue {
    double q1 = 0.0;
    double q3 = 0.0;
};

// Anything that can be evaluated as x -> (q1(x), q3(x)) on [0,1].
template <class P>
concept PotentialField = requires(const P& p, double x) {
    { p(x) } -> std::convertible_to<QValue>;
};

// Q = q1 sigma1 + q3 sigma3 sampled at x_i = i/m, i = 0..m.
struct PotentialAKNS {
    int m = 0;
    std::vector<double> q1;
    std::vector<double> q3;

    PotentialAKNS() = default;
    PotentialAKNS(std::vector<double> a, std::vector<double> b) : q1(std::move(a)), q3(std::move(b)) {
        if (q1.size() != q3.size() || q1.size() < 2)
            throw std::invalid_argument("potential needs equal-length q1, q3 with at least two samples");
        detail::require_finite(q1, "q1");
        detail::require_finite(q3, "q3");
        m = static_cast<int>(q1.size()) - 1;
    }

    static PotentialAKNS zero(int m) {
        return PotentialAKNS(std::vector<double>(m + 1), std::vector<double>(m + 1));
    }

    template <PotentialField F>
    static PotentialAKNS sample(int m, const F& f) {
        std::vector<double> a(m + 1), b(m + 1);
        for (int i = 0; i <= m; ++i) {
            QValue v = f(double(i) / m);
            a[i] = v.q1;
            b[i] = v.q3;
        }
        return PotentialAKNS(std::move(a), std::move(b));
    }

    double x(int i) const { return double(i) / m; }

    // piecewise cubic (four-point Lagrange) interpolation
    QValue operator()(double x) const {
        double s = std::clamp(x, 0.0, 1.0) * m;
        int i = std::clamp(static_cast<int>(std::floor(s)), 0, m - 1);
        if (m < 3) {
            double t = s - i;
            return {q1[i] + t * (q1[i + 1] - q1[i]), q3[i] + t * (q3[i + 1] - q3[i])};
        }
        int j0 = std::clamp(i - 1, 0, m - 3);
        double t = s - j0;
        double w[4];
        for (int a = 0; a < 4; ++a) {
            double num = 1, den = 1;
            for (int b = 0; b < 4; ++b)
                if (b != a) { num *= t - b; den *= a - b; }
            w[a] = num / den;
        }
        QValue v;
        for (int a = 0; a < 4; ++a) {
            v.q1 += w[a] * q1[j0 + a];
            v.q3 += w[a] * q3[j0 + a];
        }
        return v;
    }

    Mat2 matrix(int i) const { return q1[i] * pauli::sigma1() + q3[i] * pauli::sigma3(); }

    // sqrt( int_0^1 q1^2 + q3^2 ), trapezoid rule
    double l2_norm() const {
        double s = 0;
        for (int i = 0; i <= m; ++i) {
            double w = (i == 0 || i == m) ? 0.5 : 1.0;
            s += w * (q1[i] * q1[i] + q3[i] * q3[i]);
        }
        return std::sqrt(s / m);
    }
};

inline double l2_distance(const PotentialAKNS& a, const PotentialAKNS& b) {
    if (a.m != b.m) throw std::invalid_argument("potentials on different grids");
    double s = 0;
    for (int i = 0; i <= a.m; ++i) {
        double w = (i == 0 || i == a.m) ? 0.5 : 1.0;
        double d1 = a.q1[i] - b.q1[i], d3 = a.q3[i] - b.q3[i];
        s += w * (d1 * d1 + d3 * d3);
    }
    return std::sqrt(s / a.m);
}

inline bool is_power_of_two(long m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace akns
