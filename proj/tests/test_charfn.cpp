#include "akns/charfn.hpp"
#include "akns/forward.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace akns;
using Catch::Matchers::WithinAbs;

namespace {

SpectralData random_window(int N, unsigned seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> l(2 * N + 1), m(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        l[n + N] = pi * n + scale * g(rng) / (1.0 + std::abs(n));
        m[n + N] = pi * (n + 0.5) + scale * g(rng) / (1.0 + std::abs(n));
    }
    return SpectralData(l, m);
}

}  // namespace

TEST_CASE("unperturbed products are sin and cos") {
    auto d = SpectralData::unperturbed(8);
    auto S = CanonicalProduct::sine(d), C = CanonicalProduct::cosine(d);
    for (double z : {-7.3, -0.2, 0.0, 1.1, 3.0, 12.9}) {
        CHECK_THAT(eval_product(S, z), WithinAbs(std::sin(z), 1e-14));
        CHECK_THAT(eval_product(C, z), WithinAbs(std::cos(z), 1e-14));
    }
    auto gd = gamma_delta_via_products(d);
    for (int n = -8; n <= 8; ++n) {
        CHECK_THAT(gd.gamma[n + 8], WithinAbs(1.0, 1e-14));
        CHECK_THAT(gd.delta[n + 8], WithinAbs(1.0, 1e-14));
    }
}

TEST_CASE("products from forward spectra agree with the shooting values S, C") {
    auto q = [](double x) { return QValue{0.5 * std::sin(2 * pi * x), 0.3 * std::cos(2 * pi * x)}; };
    ForwardOptions fo{256, 4};
    const int N = 32;
    SpectralData d(eigenvalues(q, Problem::D1, N, fo), eigenvalues(q, Problem::D2, N, fo), TailPolicy::asymptotic);
    auto S = CanonicalProduct::sine(d), C = CanonicalProduct::cosine(d);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    double err = 0;
    for (int k = 0; k < 20; ++k) {
        double z = u(rng);
        auto sc = shoot(q, z, fo);
        err = std::max({err, std::abs(eval_product(S, z) - sc(0)), std::abs(eval_product(C, z) - sc(1))});
    }
    CHECK(err < 1e-5);
}

TEST_CASE("norming constants of constant q3 from two spectra match the closed form") {
    // q3 = c: alpha_n = 2 / (1 + (lambda + c)^2 / w^2), w^2 = lambda^2 - c^2; alpha_0 = 1 at lambda_0 = -c
    const double c = 0.3;
    const int N = 32;
    std::vector<double> l(2 * N + 1), m(2 * N + 1), ref(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        double w1 = pi * std::abs(n), w2 = pi * std::abs(n + 0.5);
        l[n + N] = n < 0 ? -std::hypot(w1, c) : (n == 0 ? -c : std::hypot(w1, c));
        m[n + N] = n < 0 ? -std::hypot(w2, c) : std::hypot(w2, c);
        double lam = l[n + N];
        ref[n + N] = n == 0 ? 1.0 : 2.0 / (1 + (lam + c) * (lam + c) / (w1 * w1));
    }
    auto nd = norming_from_two_spectra(SpectralData(l, m, TailPolicy::asymptotic));
    for (int n = -16; n <= 16; ++n) CHECK_THAT(nd.alpha[n + N], WithinAbs(ref[n + N], 1e-5));
}

TEST_CASE("non-interlacing spectra are rejected by the product route") {
    auto d = SpectralData::unperturbed(5);
    std::swap(d.mu[5], d.lambda[6]);
    d.mu[5] -= 0.01;
    CHECK_THROWS_AS(gamma_delta_via_products(SpectralData(d.lambda, d.mu)), Error);
}

TEST_CASE("zero-to-kernel solution puts the zeros where they belong") {
    const int N = 10, m = 64;
    auto d = random_window(N, 4, 0.3);
    std::vector<cplx> fl(2 * N + 1);
    for (int n = -N; n <= N; ++n) fl[n + N] = d.lambda[n + N] - pi * n;
    auto f = GridFunction::from_coefficients(m, N, fl);
    auto res = solve_zero_to_kernel(f);
    CHECK(res.residual <= 1e-12);
    CHECK(res.iterations <= 25);
    for (int n = -N; n <= N; ++n) CHECK(std::abs(kernel_characteristic(res.g, d.lambda[n + N])) < 1e-10);
    // the residual history is monotone
    for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] < res.history[i - 1]);
}

TEST_CASE("zero data gives the zero kernel") {
    auto res = solve_zero_to_kernel(GridFunction::zero(32));
    CHECK(res.g.norm() == 0.0);
    CHECK(res.iterations == 0);
}

TEST_CASE("the Fourier kernels reproduce S and C") {
    const int N = 8;
    auto d = random_window(N, 9, 0.25);
    auto kp = kernels_from_spectra(d, 64);
    // C(z) = cos z + int r2(t) e^{iz(1-2t)} dt vanishes at mu_n; integrate r2 by brute force
    const int P = 40000;
    for (int n = -N; n <= N; n += 4) {
        double z = d.mu[n + N];
        cplx s = std::cos(z);
        for (int k = 0; k < P; ++k) {
            double t = (k + 0.5) / P;
            s += kp.r2(t) * std::polar(1.0, z * (1 - 2 * t)) / double(P);
        }
        CHECK(std::abs(s) < 1e-7);
        CHECK(std::abs(kernel_characteristic(kp.r1, d.lambda[n + N])) < 1e-10);
    }
}

TEST_CASE("gamma and delta from the two routes agree on window data") {
    const int N = 20;
    for (unsigned seed : {1u, 2u, 3u}) {
        auto d = random_window(N, seed, 0.3);
        auto a = gamma_delta_via_products(d);
        auto b = gamma_delta_via_fourier(d);
        for (int n = -16; n <= 16; ++n) {
            CHECK_THAT(a.gamma[n + N], WithinAbs(b.gamma[n + N], 1e-4));
            CHECK_THAT(a.delta[n + N], WithinAbs(b.delta[n + N], 1e-4));
        }
    }
}

TEST_CASE("log-bound constant is the maximum of |(log(1+x) - x)/x^2| on [x0, 1]") {
    for (double h : {0.2, 0.5, 1.0}) {
        double x0 = -1 + 2 * h / pi, mx = 0;
        for (int k = 0; k <= 100000; ++k) {
            double x = x0 + (1 - x0) * k / 100000.0;
            if (std::abs(x) > 1e-4) mx = std::max(mx, std::abs((std::log1p(x) - x) / (x * x)));
        }
        CHECK_THAT(log_bound_constant(h), WithinAbs(mx, 1e-9));
    }
    CHECK(log_gamma_delta_bound(0.5, 1.0) > 0);
}
