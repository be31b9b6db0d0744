#pragma once

#include "akns/charfn.hpp"
#include "akns/core.hpp"
#include "akns/forward.hpp"
#include "akns/fourier.hpp"
#include "akns/io.hpp"
#include "akns/krein.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace akns {

struct RunConfig {
    int m = 256;
    int N = 32;
    double tol = 1e-10;
    unsigned seed = 1;
    AdmissibilityParams params;
    TailPolicy tail = TailPolicy::asymptotic;
    bool diagnostics = true;     // GLM residual and route gap (the expensive extras)
    int route_window = 16;       // |n| <= route_window for the gamma/delta route comparison
    int stability_samples = 34;  // base datasets per perturbation scale
    int stability_m = 128;
    int stability_N = 16;
    std::string out = ".";

    void validate() const {
        if (!is_power_of_two(m)) throw Error(ErrorCode::io, "grid m must be a power of two, got " + std::to_string(m));
        if (N < 1 || 2 * N + 1 > m / 2)
            throw Error(ErrorCode::io, "need 1 <= N and 2N+1 <= m/2 (N = " + std::to_string(N) + ", m = " +
                                           std::to_string(m) + ")");
        if (!(tol > 0)) throw Error(ErrorCode::io, "tol must be positive");
        params.check();
    }

    // keys: m, N, tol, seed, h, r, h_prime, r_prime, tail, diagnostics, out, stability_samples, stability_m, stability_N
    void apply(const std::map<std::string, std::string>& kv) {
        for (const auto& [k, v] : kv) {
            try {
                if (k == "m" || k == "grid") m = std::stoi(v);
                else if (k == "N" || k == "nmodes") N = std::stoi(v);
                else if (k == "tol") tol = std::stod(v);
                else if (k == "seed") seed = static_cast<unsigned>(std::stoul(v));
                else if (k == "h") params.h = std::stod(v);
                else if (k == "r") params.r = std::stod(v);
                else if (k == "h_prime") params.h_prime = std::stod(v);
                else if (k == "r_prime") params.r_prime = std::stod(v);
                else if (k == "tail") tail = parse_tail_policy(v);
                else if (k == "diagnostics") diagnostics = (v == "1" || v == "true" || v == "yes");
                else if (k == "out") out = v;
                else if (k == "stability_samples") stability_samples = std::stoi(v);
                else if (k == "stability_m") stability_m = std::stoi(v);
                else if (k == "stability_N") stability_N = std::stoi(v);
                else throw Error(ErrorCode::io, "unknown config key '" + k + "'");
            } catch (const Error&) {
                throw;
            } catch (const std::exception&) {
                throw Error(ErrorCode::io, "bad value '" + v + "' for config key '" + k + "'");
            }
        }
    }
};

struct Diagnostics {
    double eps = 0.0;           // positivity margin of I + H
    double off_form = 0.0;
    double krein_residual = 0.0;
    double glm_residual = -1.0; // -1: not computed
    double route_gap = -1.0;    // two-spectra only
    double seconds = 0.0;
};

struct Inversion {
    PotentialAKNS Q;
    NormingData norming;
    TriangularKernel R;
    Diagnostics diag;
};

inline nlohmann::json to_json(const Diagnostics& d) {
    nlohmann::json j = {{"eps_hat", d.eps},
                        {"off_form_residual", d.off_form},
                        {"krein_residual", d.krein_residual},
                        {"seconds", d.seconds}};
    j["glm_residual"] = d.glm_residual >= 0 ? nlohmann::json(d.glm_residual) : nlohmann::json(nullptr);
    j["route_gap"] = d.route_gap >= 0 ? nlohmann::json(d.route_gap) : nlohmann::json(nullptr);
    return j;
}

// Largest |gamma| and |delta| difference between the product and the Fourier route for |n| <= w.
// The Fourier route only sees the stored window, so both routes use zero remainders beyond N here.
inline double route_gap(const SpectralData& d, int w) {
    SpectralData z(d.lambda, d.mu, TailPolicy::zero_remainder);
    GammaDelta a = gamma_delta_via_products(z);
    GammaDelta b = gamma_delta_via_fourier(z);
    double gap = 0;
    for (int n = -std::min(w, d.N); n <= std::min(w, d.N); ++n)
        gap = std::max({gap, std::abs(a.gamma[n + d.N] - b.gamma[n + d.N]),
                        std::abs(a.delta[n + d.N] - b.delta[n + d.N])});
    return gap;
}

// norming data -> h -> H -> certificate -> Krein -> Q
inline Inversion invert_norming(const NormingData& nd, const RunConfig& cfg, bool check = true) {
    auto t0 = std::chrono::steady_clock::now();
    if (check) {
        NormingReport rep = norming_floor_check(nd, cfg.params);
        if (!(rep.min_alpha > 0) || !rep.in_A || rep.violation_index)
            throw Error(ErrorCode::admissibility, "norming data rejected: " + rep.reason, rep.violation_index);
    }
    if (2 * nd.N + 1 > cfg.m)
        throw Error(ErrorCode::admissibility, "2N+1 exceeds the grid: refine m or lower N");
    MatrixKernel H2 = build_H(build_h(nd, 2 * cfg.m));
    MatrixKernel H = coarsen(H2);
    PositivityCertificate cert = certify_positivity(H);
    if (!cert.passed)
        throw Error(ErrorCode::positivity,
                    "I + H is not positive on the grid (smallest eigenvalue " + std::to_string(cert.eps) + ")");
    Inversion out;
    out.norming = nd;
    out.R = solve_krein(H);
    Reconstruction rec = reconstruct_Q(out.R);
    out.Q = std::move(rec.Q);
    out.diag.eps = cert.eps;
    out.diag.off_form = rec.off_form;
    if (cfg.diagnostics) {
        out.diag.krein_residual = krein_residual(out.R, H);
        out.diag.glm_residual = glm_residual(K_from_R(out.R, H2), build_F(H2)).max;
    }
    out.diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline Inversion invert_two_spectra(const SpectralData& d, const RunConfig& cfg, bool check = true) {
    auto t0 = std::chrono::steady_clock::now();
    if (check) {
        SpectralReport rep = validate_spectral(d, cfg.params);
        if (!rep.member)
            throw Error(ErrorCode::admissibility, "spectral data rejected: " + rep.reason, rep.violation_index);
    }
    Inversion out = invert_norming(norming_from_two_spectra(d), cfg, false);
    if (cfg.diagnostics) out.diag.route_gap = route_gap(d, cfg.route_window);
    out.diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ---- forward data ----

template <PotentialField P>
SpectralData forward_spectra(const P& q, int N, int m, TailPolicy tail = TailPolicy::asymptotic, double tol = 1e-12) {
    ForwardOptions fo{m, 4};
    return SpectralData(eigenvalues(q, Problem::D1, N, fo, tol), eigenvalues(q, Problem::D2, N, fo, tol), tail);
}

template <PotentialField P>
NormingData forward_norming(const P& q, const std::vector<double>& lambda, int m,
                            TailPolicy tail = TailPolicy::asymptotic) {
    return NormingData(lambda, norming_direct(q, lambda, ForwardOptions{m, 4}), tail);
}

// ---- round-trip family ----

struct TestPotential {
    std::string name;
    std::function<QValue(double)> q;
};

// Trigonometric polynomials scaled to ||Q||_2 in {0.25, 0.5, 1}. The "sin" shape vanishes at both
// ends, the "mixed" shape does not.
inline std::vector<TestPotential> roundtrip_family() {
    auto shape_sin = [](double x) -> QValue {
        return {0.5 * std::sin(2 * pi * x) + 0.3 * std::sin(3 * pi * x), 0.4 * std::sin(pi * x) - 0.2 * std::sin(4 * pi * x)};
    };
    auto shape_mixed = [](double x) -> QValue {
        return {0.5 * std::sin(2 * pi * x) + 0.3 * std::cos(4 * pi * x), 0.4 * std::cos(2 * pi * x) - 0.2 * std::sin(6 * pi * x)};
    };
    std::vector<TestPotential> fam;
    auto add = [&](const std::string& name, auto shape) {
        const double n0 = PotentialAKNS::sample(4096, shape).l2_norm();
        for (double target : {0.25, 0.5, 1.0}) {
            const double a = target / n0;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s-%.2f", name.c_str(), target);
            fam.push_back({buf, [shape, a](double x) {
                               QValue v = shape(x);
                               return QValue{a * v.q1, a * v.q3};
                           }});
        }
    };
    add("sin", shape_sin);
    add("mixed", shape_mixed);
    return fam;
}

struct RoundTripRow {
    std::string name;
    int m = 0;
    int N = 0;
    double q_norm = 0.0;
    double rel_error = 0.0;
    double alpha_check = 0.0;  // max relative gap, product route vs direct, |n| <= 16
    double rho_norm = 0.0;
    bool in_class = false;     // member of N(h, r) for the configured h, r
    Diagnostics diag;
    double forward_seconds = 0.0;
};

inline RoundTripRow roundtrip_one(const TestPotential& tp, const RunConfig& cfg) {
    RoundTripRow row{tp.name, cfg.m, cfg.N};
    auto t0 = std::chrono::steady_clock::now();
    SpectralData d = forward_spectra(tp.q, cfg.N, cfg.m, cfg.tail);
    const int w = std::min(16, cfg.N);
    std::vector<double> lw(d.lambda.begin() + (cfg.N - w), d.lambda.begin() + (cfg.N + w + 1));
    std::vector<double> ad = norming_direct(tp.q, lw, ForwardOptions{cfg.m, 4});
    row.forward_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // ||Q|| = 1 gives ||rho|| slightly above 1, so membership is reported rather than enforced here
    SpectralReport rep = validate_spectral(d, cfg.params);
    row.rho_norm = rep.rho_norm;
    row.in_class = rep.member;
    Inversion inv = invert_two_spectra(d, cfg, false);
    for (int n = -w; n <= w; ++n)
        row.alpha_check = std::max(row.alpha_check, std::abs(inv.norming.alpha[n + cfg.N] - ad[n + w]) / ad[n + w]);
    PotentialAKNS truth = PotentialAKNS::sample(cfg.m, tp.q);
    row.q_norm = truth.l2_norm();
    row.rel_error = l2_distance(inv.Q, truth) / row.q_norm;
    row.diag = inv.diag;
    return row;
}

inline nlohmann::json to_json(const RoundTripRow& r) {
    return {{"name", r.name},       {"m", r.m},
            {"N", r.N},             {"q_norm", r.q_norm},
            {"rel_error", r.rel_error}, {"alpha_check", r.alpha_check},
            {"rho_norm", r.rho_norm}, {"in_class", r.in_class},
            {"forward_seconds", r.forward_seconds}, {"diagnostics", to_json(r.diag)}};
}

// ---- stability ----

struct StabilityPair {
    double scale = 0.0;
    double dnu = 0.0;
    double dq = 0.0;
};

struct ScaleSummary {
    double scale = 0.0;
    int count = 0;
    double fitted_L = 0.0;   // least squares slope of dq against dnu through the origin
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
};

struct StabilityReport {
    double h = 0.0;
    double r = 0.0;
    int m = 0;
    int N = 0;
    unsigned seed = 0;
    std::vector<StabilityPair> pairs;
    std::vector<ScaleSummary> scales;
    double fitted_L = 0.0;
    double max_ratio = 0.0;
    int rejected = 0;       // samples dropped by the sampler or the positivity check
    std::string sampling = "iid Gaussian remainders rescaled into N(h,r), rejection on separation";
};

namespace detail {

inline bool separated(const std::vector<double>& rem, int N, double h) {
    // interleaved order: lambda_-N, mu_-N, lambda_-N+1, ...; unperturbed spacing pi/2
    double prev = -pi * (N + 1) + pi / 2;  // mu_{-N-1} with zero remainder
    for (int k = 0; k < int(rem.size()); ++k) {
        double v = -pi * N + k * pi / 2 + rem[k];
        if (v - prev < h) return false;
        prev = v;
    }
    return (pi * (N + 1)) - prev >= h;
}

inline SpectralData from_remainders(const std::vector<double>& rem, int N) {
    std::vector<double> l(2 * N + 1), m(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        l[n + N] = pi * n + rem[2 * (n + N)];
        m[n + N] = pi * (n + 0.5) + rem[2 * (n + N) + 1];
    }
    return SpectralData(std::move(l), std::move(m));
}

// Gaussian remainders with decaying variance, rescaled to norm `radius`, accepted if h-separated.
inline std::vector<double> sample_in_N(std::mt19937_64& rng, int N, double h, double radius, int& rejected) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> rem(2 * (2 * N + 1));
        for (int k = 0; k < int(rem.size()); ++k) {
            int n = k / 2 - N;
            rem[k] = g(rng) / (1.0 + std::abs(n));
        }
        double s = l2_norm(rem);
        for (auto& v : rem) v *= radius / s;
        if (separated(rem, N, h)) return rem;
        ++rejected;
    }
    throw Error(ErrorCode::admissibility, "could not sample an h-separated sequence");
}

}  // namespace detail

// Base data at 0.6 r, perturbation directions of unit norm scaled by delta, projected back into N(h,r).
inline StabilityReport run_stability(const RunConfig& cfg, const std::vector<double>& scales = {1e-1, 1e-2, 1e-3}) {
    RunConfig sc = cfg;
    sc.m = cfg.stability_m;
    sc.N = cfg.stability_N;
    sc.diagnostics = false;
    sc.tail = TailPolicy::zero_remainder;
    sc.validate();
    StabilityReport rep;
    rep.h = cfg.params.h;
    rep.r = cfg.params.r;
    rep.m = sc.m;
    rep.N = sc.N;
    rep.seed = cfg.seed;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const int N = sc.N;

    for (int s = 0; s < cfg.stability_samples; ++s) {
        std::vector<double> base = detail::sample_in_N(rng, N, rep.h, 0.6 * rep.r, rep.rejected);
        std::vector<double> dir(base.size());
        for (int k = 0; k < int(dir.size()); ++k) dir[k] = g(rng) / (1.0 + std::abs(k / 2 - N));
        double dn = l2_norm(dir);
        for (auto& v : dir) v /= dn;
        Inversion b0;
        try {
            b0 = invert_two_spectra(detail::from_remainders(base, N), sc);
        } catch (const Error&) {
            ++rep.rejected;
            continue;
        }
        for (double delta : scales) {
            std::vector<double> p(base.size());
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = base[k] + delta * dir[k];
            double pn = l2_norm(p);
            if (pn > rep.r)
                for (auto& v : p) v *= rep.r / pn;
            if (!detail::separated(p, N, rep.h)) {
                ++rep.rejected;
                continue;
            }
            try {
                Inversion b1 = invert_two_spectra(detail::from_remainders(p, N), sc);
                std::vector<double> d(p.size());
                for (std::size_t k = 0; k < p.size(); ++k) d[k] = p[k] - base[k];
                rep.pairs.push_back({delta, l2_norm(d), l2_distance(b1.Q, b0.Q)});
            } catch (const Error&) {
                ++rep.rejected;
            }
        }
    }
    std::sort(rep.pairs.begin(), rep.pairs.end(), [](const StabilityPair& a, const StabilityPair& b) {
        return std::tie(a.scale, a.dnu, a.dq) < std::tie(b.scale, b.dnu, b.dq);
    });
    double sxy_all = 0, sxx_all = 0;
    for (double delta : scales) {
        ScaleSummary ss;
        ss.scale = delta;
        double sxy = 0, sxx = 0, sum = 0;
        for (const auto& p : rep.pairs)
            if (p.scale == delta && p.dnu > 0) {
                ++ss.count;
                sxy += p.dnu * p.dq;
                sxx += p.dnu * p.dnu;
                ss.max_ratio = std::max(ss.max_ratio, p.dq / p.dnu);
                sum += p.dq / p.dnu;
            }
        ss.fitted_L = sxx > 0 ? sxy / sxx : 0.0;
        ss.mean_ratio = ss.count ? sum / ss.count : 0.0;
        sxy_all += sxy;
        sxx_all += sxx;
        rep.max_ratio = std::max(rep.max_ratio, ss.max_ratio);
        rep.scales.push_back(ss);
    }
    rep.fitted_L = sxx_all > 0 ? sxy_all / sxx_all : 0.0;
    return rep;
}

inline nlohmann::json to_json(const StabilityReport& r) {
    nlohmann::json j = {{"h", r.h},         {"r", r.r},           {"m", r.m},
                        {"N", r.N},         {"seed", r.seed},     {"fitted_L", r.fitted_L},
                        {"max_ratio", r.max_ratio}, {"rejected", r.rejected}, {"sampling", r.sampling}};
    j["scales"] = nlohmann::json::array();
    for (const auto& s : r.scales)
        j["scales"].push_back({{"scale", s.scale}, {"count", s.count}, {"fitted_L", s.fitted_L},
                               {"max_ratio", s.max_ratio}, {"mean_ratio", s.mean_ratio}});
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : r.pairs) j["pairs"].push_back({{"scale", p.scale}, {"dnu", p.dnu}, {"dq", p.dq}});
    return j;
}

}  // namespace akns
