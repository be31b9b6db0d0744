// Acceptance run: one PASS/FAIL line per criterion, exit status = number of failures.
#include "akns/akns.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace akns;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Dataset {
    std::string name;
    std::function<QValue(double)> q;
    SpectralData d;
    Inversion inv;
    double rel_error = 0;
    double alpha_gap = 0;
    double transform = 0;
    double seconds = 0;
};

Dataset run_dataset(const TestPotential& tp, int m, int N, bool extras) {
    auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg;
    cfg.m = m;
    cfg.N = N;
    cfg.diagnostics = extras;
    Dataset ds{tp.name, tp.q};
    ds.d = forward_spectra(tp.q, N, m);
    ds.inv = invert_two_spectra(ds.d, cfg, false);
    auto truth = PotentialAKNS::sample(m, tp.q);
    ds.rel_error = l2_distance(ds.inv.Q, truth) / truth.l2_norm();
    if (extras) {
        ForwardOptions fo{m, 4};
        std::vector<double> lw(ds.d.lambda.begin() + (N - 16), ds.d.lambda.begin() + (N + 17));
        auto ad = norming_direct(tp.q, lw, fo);
        for (int n = -16; n <= 16; ++n)
            ds.alpha_gap = std::max(ds.alpha_gap, std::abs(ds.inv.norming.alpha[n + N] - ad[n + 16]) / ad[n + 16]);
        std::mt19937_64 rng(std::hash<std::string>{}(tp.name));
        std::uniform_real_distribution<double> u(-12.0, 12.0);
        for (int k = 0; k < 10; ++k) {
            double l = u(rng);
            auto s = integrate(tp.q, l, fo);
            auto [u1, u2] = transform_free_solution(ds.inv.R, l);
            for (int i = 0; i <= m; ++i) ds.transform = std::max(ds.transform, std::hypot(s.u1[i] - u1[i], s.u2[i] - u2[i]));
        }
    }
    ds.seconds = seconds_since(t0);
    return ds;
}

}  // namespace

int main() {
    const auto family = roundtrip_family();

    // 1
    {
        auto t0 = std::chrono::steady_clock::now();
        RunConfig cfg;
        auto inv = invert_two_spectra(SpectralData::unperturbed(32), cfg);
        double s = seconds_since(t0);
        double qn = inv.Q.l2_norm();
        report(1, qn <= 1e-8 && s < 5, "zero-potential exactness", fmt("|Q| = %.2e at m = 256, N = 32 in %.2f s", qn, s));
    }

    // 2, 3, 4, 8, 9 share the round-trip datasets
    std::vector<Dataset> coarse;
    bool rt_ok = true;
    std::string rt_detail;
    for (const auto& tp : family) {
        Dataset a = run_dataset(tp, 256, 32, true);
        Dataset b = run_dataset(tp, 512, 64, false);
        bool ok = a.rel_error <= 0.05 && b.rel_error < a.rel_error && a.seconds + b.seconds < 120;
        rt_ok = rt_ok && ok;
        rt_detail += fmt("\n       %-11s %.2e -> %.2e  (%.1f s + %.1f s)", tp.name.c_str(), a.rel_error, b.rel_error,
                         a.seconds, b.seconds);
        coarse.push_back(std::move(a));
    }
    report(2, rt_ok, "round trip", "relative L2 error at (256,32) -> (512,64)" + rt_detail);

    {
        double worst = 0;
        for (const auto& ds : coarse) worst = std::max(worst, ds.alpha_gap);
        report(3, worst <= 1e-3, "norming constants, products vs direct", fmt("max relative gap %.2e for |n| <= 16", worst));
    }

    {
        // the Fourier route sees only the stored window, so both routes run on window data (zero remainders
        // beyond N): the round-trip spectra plus random windows
        double worst = 0;
        for (const auto& ds : coarse) worst = std::max(worst, ds.inv.diag.route_gap);
        std::mt19937_64 rng(21);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int k = 0; k < 5; ++k) {
            const int N = 24;
            std::vector<double> l(2 * N + 1), m(2 * N + 1);
            for (int n = -N; n <= N; ++n) {
                l[n + N] = pi * n + 0.3 * g(rng) / (1.0 + std::abs(n));
                m[n + N] = pi * (n + 0.5) + 0.3 * g(rng) / (1.0 + std::abs(n));
            }
            worst = std::max(worst, route_gap(SpectralData(l, m), 16));
        }
        report(4, worst <= 1e-4, "gamma/delta product route vs Fourier route", fmt("max gap %.2e for |n| <= 16", worst));
    }

    // 5
    {
        const int m = 64;
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<cplx> c(41), c2(41);
        for (int n = -20; n <= 20; ++n) {
            c[n + 20] = cplx(g(rng), g(rng)) / (1.0 + std::abs(n));
            c2[n + 20] = cplx(g(rng), g(rng)) / (1.0 + n * n);
        }
        auto gf = GridFunction::from_coefficients(m, 20, c), hf = GridFunction::from_coefficients(m, 20, c2);
        auto zero = GridFunction::zero(m);
        double e_phi = (map_Phi(zero, gf) - gf).norm(), e_psi = (map_Psi(zero, gf) - gf).norm();
        auto cv = conv(gf, hf);
        double e_conv = 0;
        for (int j = 0; j < m; ++j) {
            cplx s = 0;
            for (int k = 0; k < m; ++k) s += gf[k] * hf[(j - k + m) % m];
            e_conv = std::max(e_conv, std::abs(cv[j] - s / double(m)));
        }
        std::vector<cplx> one(5);
        const cplx a(0.3, 0.1);
        one[2 + 1] = a;
        auto f1 = GridFunction::from_coefficients(m, 2, one);
        auto gof = map_g_of_f(f1);
        double e_g = 0;
        for (int j = 0; j < m; ++j) {
            double s = double(j) / m;
            e_g = std::max(e_g, std::abs(gof[j] - (std::exp(cplx(0, 2) * a * s) - 1.0) * std::polar(1.0, 2 * pi * s)));
        }
        report(5, e_phi <= 1e-12 && e_psi <= 1e-12 && e_conv <= 1e-12 && e_g <= 1e-10, "series-map identities",
               fmt("Phi(0,g) %.1e, Psi(0,g) %.1e, convolution %.1e, g(f) single mode %.1e", e_phi, e_psi, e_conv, e_g));
    }

    // 6
    {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> g(0.0, 1.0);
        double idem = 0, adj = 0;
        for (int k = 0; k < 100; ++k) {
            FullKernel X = FullKernel::zero(16), Y = FullKernel::zero(16);
            for (auto& b : X.data) b << g(rng), g(rng), g(rng), g(rng);
            for (auto& b : Y.data) b << g(rng), g(rng), g(rng), g(rng);
            auto PX = project_plus(X).to_full(), PPX = project_plus(PX).to_full();
            for (std::size_t i = 0; i < PX.data.size(); ++i) idem = std::max(idem, (PX.data[i] - PPX.data[i]).norm());
            adj = std::max(adj, std::abs(hs_inner(PX, Y) - hs_inner(X, project_plus(Y).to_full())));
        }
        report(6, idem <= 1e-12 && adj <= 1e-12, "triangular projector laws",
               fmt("idempotence %.1e, self-adjointness %.1e over 100 kernels", idem, adj));
    }

    // 7
    {
        double min_eps = 1e300;
        for (const auto& ds : coarse) min_eps = std::min(min_eps, ds.inv.diag.eps);
        // quadratic form on the strongest dataset at m = 128
        const Dataset& hard = *std::min_element(coarse.begin(), coarse.end(),
                                                [](const Dataset& a, const Dataset& b) { return a.inv.diag.eps < b.inv.diag.eps; });
        MatrixKernel H = build_H(build_h(hard.inv.norming, 128));
        auto cert = certify_positivity(H);
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g(0.0, 1.0);
        double worst = 1e300;
        for (int k = 0; k < 100; ++k) {
            TriangularKernel Y = TriangularKernel::zero(128);
            for (auto& b : Y.data) b << g(rng), g(rng), g(rng), g(rng);
            auto [form, yy] = krein_quadratic_form(Y, H);
            worst = std::min(worst, form / yy - (cert.eps - 1e-6));
        }
        report(7, min_eps > 0 && cert.eps > 0 && worst >= 0, "positivity and quadratic-form bound",
               fmt("min eps over datasets %.4f; on %s (m = 128) eps %.4f, min <(I+P H)Y,Y>/<Y,Y> - eps = %.2e",
                   min_eps, hard.name.c_str(), cert.eps, worst));
    }

    {
        double worst = 0;
        std::string where;
        for (const auto& ds : coarse)
            if (ds.inv.diag.glm_residual > worst) {
                worst = ds.inv.diag.glm_residual;
                where = ds.name;
            }
        report(8, worst <= 1e-4, "GLM residual", fmt("max %.2e (%s) at m = 256", worst, where.c_str()));
    }

    {
        double worst = 0;
        for (const auto& ds : coarse) worst = std::max(worst, ds.transform);
        report(9, worst <= 1e-3, "transformation identity", fmt("max residual %.2e at 10 lambda per dataset", worst));
    }

    // 10
    {
        const double h = 0.5, r = 1.0;
        const double bound = log_gamma_delta_bound(h, r);
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> radius(0.05, r);
        int rejected = 0, count = 0;
        double worst = 0;
        for (int k = 0; k < 50; ++k) {
            auto rem = detail::sample_in_N(rng, 32, h, radius(rng), rejected);
            auto gd = gamma_delta_via_products(detail::from_remainders(rem, 32));
            for (std::size_t i = 0; i < gd.gamma.size(); ++i)
                worst = std::max({worst, std::abs(std::log(gd.gamma[i])), std::abs(std::log(gd.delta[i]))});
            ++count;
        }
        report(10, worst <= bound, "log gamma/delta bound",
               fmt("sup |log| = %.4f <= %.4f over %d samples in N(%.1f,%.1f)", worst, bound, count, h, r));
    }

    // 11
    {
        auto t0 = std::chrono::steady_clock::now();
        RunConfig cfg;
        StabilityReport rep = run_stability(cfg);
        double s = seconds_since(t0);
        double lo = 1e300, hi = 0;
        std::string per;
        for (const auto& sc : rep.scales) {
            lo = std::min(lo, sc.fitted_L);
            hi = std::max(hi, sc.fitted_L);
            per += fmt(" %g:%.3f", sc.scale, sc.fitted_L);
        }
        bool ok = rep.pairs.size() >= 100 && lo > 0 && hi / lo < 3 && s < 600;
        report(11, ok, "stability",
               fmt("%zu pairs, L per scale%s, spread %.3f, max ratio %.3f, %.0f s", rep.pairs.size(), per.c_str(),
                   hi / lo, rep.max_ratio, s));
    }

    // 12
    {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        // elements of S_eps = {a 1 + x : |a| >= eps, inf |a + x_n| >= eps}
        auto element = [&](double eps, bool unit_scalar) {
            const int N = 16;
            for (;;) {
                AlgebraElement e{unit_scalar ? cplx(1.0) : 1.5 * cplx(u(rng), u(rng)), std::vector<cplx>(2 * N + 1)};
                if (std::abs(e.a) < eps) continue;
                bool ok = true;
                for (auto& x : e.x) {
                    x = cplx(u(rng), u(rng)) * (unit_scalar ? 0.5 : 0.125);
                    ok = ok && std::abs(e.a + x) >= eps;
                }
                if (ok) return e;
            }
        };
        double mb = 0, dbl = 0, L = 0;
        for (int k = 0; k < 100; ++k) {
            AlgebraElement e = element(0.5, true);
            mb = std::max(mb, (e * algebra_invert(e) - AlgebraElement::unit(16)).norm());
            AlgebraElement e1 = element(0.1, false), e2 = element(0.1, false);
            AlgebraElement i1 = algebra_invert(e1), i2 = algebra_invert(e2);
            dbl = std::max(dbl, (algebra_invert(i1) - e1).norm());
            L = std::max(L, (i1 - i2).norm() / (e1 - e2).norm());
        }
        report(12, mb <= 1e-14 && dbl <= 1e-12 && std::isfinite(L), "algebra inversion",
               fmt("multiply-back %.1e, double inversion %.1e, empirical Lipschitz constant on S_0.1 = %.2f", mb, dbl, L));
    }

    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
