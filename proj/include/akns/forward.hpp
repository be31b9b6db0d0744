#pragma once

#include "akns/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace akns {

// s(x, lambda) sampled on x_i = i/m.
struct Solution2 {
    double lambda = 0.0;
    std::vector<double> u1;
    std::vector<double> u2;
};

enum class Problem { D1, D2 };

struct ForwardOptions {
    int m = 256;        // output / integration grid
    int substeps = 4;   // Magnus steps per grid cell
};

namespace detail {

// l_Q u = lambda u with l_Q = sigma2 (1/i) d/dx + Q reads u' = J (lambda - Q) u, i.e.
//   u1' = -q1 u1 + (lambda + q3) u2
//   u2' = (q3 - lambda) u1 + q1 u2
inline Mat2 dirac_generator(QValue q, double lambda) {
    Mat2 A;
    A << -q.q1, lambda + q.q3, q.q3 - lambda, q.q1;
    return A;
}

// exp of a traceless real 2x2 matrix
inline Mat2 expm_traceless(const Mat2& W) {
    const double d = W(0, 0) * W(0, 0) + W(0, 1) * W(1, 0);
    double c, s;
    if (std::abs(d) < 1e-8) {
        c = 1 + d / 2 + d * d / 24;
        s = 1 + d / 6 + d * d / 120;
    } else if (d > 0) {
        double r = std::sqrt(d);
        c = std::cosh(r);
        s = std::sinh(r) / r;
    } else {
        double r = std::sqrt(-d);
        c = std::cos(r);
        s = std::sin(r) / r;
    }
    return c * Mat2::Identity() + s * W;
}

// One fourth-order Magnus step over [x, x + h].
template <PotentialField P>
Mat2 magnus_step(const P& q, double lambda, double x, double h) {
    static const double g = std::sqrt(3.0) / 6.0;
    Mat2 A1 = dirac_generator(q(x + (0.5 - g) * h), lambda);
    Mat2 A2 = dirac_generator(q(x + (0.5 + g) * h), lambda);
    Mat2 W = 0.5 * h * (A1 + A2) + (std::sqrt(3.0) / 12.0) * h * h * (A2 * A1 - A1 * A2);
    return expm_traceless(W);
}

}  // namespace detail

template <PotentialField P>
Solution2 integrate(const P& q, double lambda, const ForwardOptions& opt = {}) {
    const int m = opt.m, ns = opt.substeps;
    if (m < 1 || ns < 1) throw std::invalid_argument("grid and substeps must be positive");
    Solution2 s{lambda, std::vector<double>(m + 1), std::vector<double>(m + 1)};
    Eigen::Vector2d u(0.0, 1.0);
    s.u1[0] = 0.0;
    s.u2[0] = 1.0;
    const double h = 1.0 / (double(m) * ns);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < ns; ++k) u = detail::magnus_step(q, lambda, (double(i) * ns + k) * h, h) * u;
        s.u1[i + 1] = u(0);
        s.u2[i + 1] = u(1);
    }
    return s;
}

inline Solution2 integrate(const PotentialAKNS& q, double lambda, int substeps = 4) {
    return integrate(q, lambda, ForwardOptions{q.m, substeps});
}

// (S(lambda), C(lambda)) = (s1(1, lambda), s2(1, lambda))
template <PotentialField P>
Eigen::Vector2d shoot(const P& q, double lambda, const ForwardOptions& opt = {}) {
    const int steps = opt.m * opt.substeps;
    const double h = 1.0 / steps;
    Eigen::Vector2d u(0.0, 1.0);
    for (int k = 0; k < steps; ++k) u = detail::magnus_step(q, lambda, k * h, h) * u;
    return u;
}

namespace detail {

template <class F>
double illinois(const F& f, double a, double b, double fa, double fb, double tol) {
    int side = 0;
    double c = a;
    for (int it = 0; it < 200; ++it) {
        c = (a * fb - b * fa) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
        double fc = f(c);
        if (fc == 0.0 || std::abs(b - a) < tol) return c;
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (std::abs(b - a) < tol) return 0.5 * (a + b);
    }
    return c;
}

}  // namespace detail

// Zeros of s1(1, .) (D1) or s2(1, .) (D2) in the brackets of width pi around pi n or pi(n + 1/2).
template <PotentialField P>
std::vector<double> eigenvalues(const P& q, Problem which, int N, const ForwardOptions& opt = {},
                                double tol = 1e-12) {
    const int comp = which == Problem::D1 ? 0 : 1;
    auto f = [&](double l) { return shoot(q, l, opt)(comp); };
    std::vector<double> out;
    out.reserve(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        const double c = which == Problem::D1 ? pi * n : pi * (n + 0.5);
        bool found = false;
        for (int pts : {8, 64}) {
            std::vector<double> xs(pts + 1), fs(pts + 1);
            for (int k = 0; k <= pts; ++k) {
                xs[k] = c - pi / 2 + pi * k / pts;
                fs[k] = f(xs[k]);
            }
            int changes = 0, at = -1;
            for (int k = 0; k < pts; ++k)
                if ((fs[k] > 0) != (fs[k + 1] > 0)) { ++changes; at = k; }
            if (changes == 1) {
                out.push_back(fs[at] == 0 ? xs[at]
                                          : detail::illinois(f, xs[at], xs[at + 1], fs[at], fs[at + 1], tol));
                found = true;
                break;
            }
        }
        if (!found)
            throw Error(ErrorCode::solver,
                        std::string(which == Problem::D1 ? "D1" : "D2") +
                            " eigenvalue bracket does not contain exactly one zero at n = " + std::to_string(n),
                        n);
    }
    return out;
}

inline std::vector<double> eigenvalues(const PotentialAKNS& q, Problem which, int N, int substeps = 4) {
    return eigenvalues(q, which, N, ForwardOptions{q.m, substeps});
}

// alpha_n = 1 / int_0^1 (u1^2 + u2^2) dx, trapezoid on the sub-step grid.
template <PotentialField P>
std::vector<double> norming_direct(const P& q, const std::vector<double>& lambdas, const ForwardOptions& opt = {}) {
    std::vector<double> a;
    a.reserve(lambdas.size());
    const int steps = opt.m * opt.substeps;
    const double h = 1.0 / steps;
    for (double l : lambdas) {
        Eigen::Vector2d u(0.0, 1.0);
        double s = 0.5 * u.squaredNorm();
        for (int k = 0; k < steps; ++k) {
            u = detail::magnus_step(q, l, k * h, h) * u;
            s += (k + 1 == steps ? 0.5 : 1.0) * u.squaredNorm();
        }
        a.push_back(1.0 / (s * h));
    }
    return a;
}

inline std::vector<double> norming_direct(const PotentialAKNS& q, const std::vector<double>& lambdas,
                                          int substeps = 4) {
    return norming_direct(q, lambdas, ForwardOptions{q.m, substeps});
}

}  // namespace akns
