#include "akns/akns.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace akns;
using nlohmann::json;

namespace {

struct Common {
    int grid = 0;
    int nmodes = 0;
    double tol = 0;
    long seed = -1;
    std::string out;
    std::string config;
    std::string tail;
};

RunConfig resolve(const Common& c) {
    RunConfig cfg;
    if (!c.config.empty()) cfg.apply(io::parse_config(io::read_text(c.config), c.config));
    if (c.grid) cfg.m = c.grid;
    if (c.nmodes) cfg.N = c.nmodes;
    if (c.tol > 0) cfg.tol = c.tol;
    if (c.seed >= 0) cfg.seed = static_cast<unsigned>(c.seed);
    if (!c.out.empty()) cfg.out = c.out;
    if (!c.tail.empty()) {
        try {
            cfg.tail = parse_tail_policy(c.tail);
        } catch (const std::invalid_argument& e) {
            throw Error(ErrorCode::io, e.what());
        }
    }
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + cfg.out + "'");
    return cfg;
}

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

void write_json(const std::string& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

int cmd_forward(const RunConfig& cfg, const std::string& potential) {
    PotentialAKNS q = io::read_potential(potential);
    SpectralData d = forward_spectra(q, cfg.N, cfg.m, cfg.tail, std::min(cfg.tol, 1e-10));
    NormingData nd = forward_norming(q, d.lambda, cfg.m, cfg.tail);
    write_json(path_in(cfg, "spectra.json"), io::to_json(d));
    write_json(path_in(cfg, "norming.json"), io::to_json(nd));
    SpectralReport rep = validate_spectral(d, cfg.params);
    std::printf("N = %d  min gap = %.4f  |rho| = %.4f  in N(h,r): %s\n", d.N, rep.min_gap, rep.rho_norm,
                rep.member ? "yes" : "no");
    std::printf("wrote %s, %s\n", path_in(cfg, "spectra.json").c_str(), path_in(cfg, "norming.json").c_str());
    return 0;
}

void write_inversion(const RunConfig& cfg, const Inversion& inv) {
    io::write_text(path_in(cfg, "potential.csv"), io::potential_csv(inv.Q));
    json j = to_json(inv.diag);
    j["m"] = cfg.m;
    j["N"] = inv.norming.N;
    j["q_norm"] = inv.Q.l2_norm();
    write_json(path_in(cfg, "diagnostics.json"), j);
    std::printf("|Q| = %.6g  eps = %.4f  glm = %.3g  off-form = %.3g", inv.Q.l2_norm(), inv.diag.eps,
                inv.diag.glm_residual, inv.diag.off_form);
    if (inv.diag.route_gap >= 0) std::printf("  route gap = %.3g", inv.diag.route_gap);
    std::printf("  (%.2f s)\n", inv.diag.seconds);
}

int cmd_invert_two(const RunConfig& cfg, const std::string& file, bool tail_given) {
    SpectralData d = io::read_spectral(file, tail_given ? std::optional(cfg.tail) : std::nullopt);
    write_inversion(cfg, invert_two_spectra(d, cfg));
    return 0;
}

int cmd_invert_norming(const RunConfig& cfg, const std::string& file, bool tail_given) {
    NormingData nd = io::read_norming(file, tail_given ? std::optional(cfg.tail) : std::nullopt);
    write_inversion(cfg, invert_norming(nd, cfg));
    return 0;
}

int cmd_stability(const RunConfig& cfg) {
    StabilityReport rep = run_stability(cfg);
    write_json(path_in(cfg, "stability.json"), to_json(rep));
    std::printf("N(%.2f, %.2f), m = %d, N = %d, %zu pairs (%d rejected)\n", rep.h, rep.r, rep.m, rep.N,
                rep.pairs.size(), rep.rejected);
    for (const auto& s : rep.scales)
        std::printf("  scale %-6g  pairs %3d  L = %.4f  max ratio = %.4f\n", s.scale, s.count, s.fitted_L, s.max_ratio);
    std::printf("fitted L = %.4f  max ratio = %.4f\n", rep.fitted_L, rep.max_ratio);
    return 0;
}

int cmd_roundtrip(const RunConfig& cfg) {
    json rows = json::array();
    std::printf("%-12s %6s %10s %10s %10s %8s %8s\n", "potential", "|Q|", "rel.err", "alpha", "glm", "eps", "sec");
    for (const auto& tp : roundtrip_family()) {
        RoundTripRow r = roundtrip_one(tp, cfg);
        std::printf("%-12s %6.3f %10.3e %10.3e %10.3e %8.4f %8.2f\n", r.name.c_str(), r.q_norm, r.rel_error,
                    r.alpha_check, r.diag.glm_residual, r.diag.eps, r.forward_seconds + r.diag.seconds);
        rows.push_back(to_json(r));
    }
    write_json(path_in(cfg, "roundtrip.json"), {{"m", cfg.m}, {"N", cfg.N}, {"rows", rows}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse spectral problem for AKNS Dirac operators on [0,1]"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--grid", c.grid, "grid resolution m (power of two, default 256)");
    app.add_option("--nmodes", c.nmodes, "spectral truncation N (default 32)");
    app.add_option("--tol", c.tol, "solver tolerance (default 1e-10)");
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--out", c.out, "output directory (default .)");
    app.add_option("--config", c.config, "flat key = value config file");
    app.add_option("--tail", c.tail, "tail policy beyond N: asymptotic | zero_remainder");

    std::string potential, spectra, norming;
    auto* fwd = app.add_subcommand("forward", "spectra and norming constants of a CSV potential (x,q1,q3)");
    fwd->add_option("potential", potential)->required();
    auto* inv2 = app.add_subcommand("invert-two-spectra", "reconstruct Q from two spectra (JSON)");
    inv2->add_option("spectra", spectra)->required();
    auto* invn = app.add_subcommand("invert-norming", "reconstruct Q from eigenvalues and norming constants (JSON)");
    invn->add_option("norming", norming)->required();
    auto* stab = app.add_subcommand("stability", "empirical Lipschitz probe over random admissible data");
    auto* rt = app.add_subcommand("roundtrip", "forward -> invert -> compare on the built-in potential family");
    for (auto* sub : {fwd, inv2, invn, stab, rt}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = resolve(c);
        if (*fwd) return cmd_forward(cfg, potential);
        if (*inv2) return cmd_invert_two(cfg, spectra, !c.tail.empty());
        if (*invn) return cmd_invert_norming(cfg, norming, !c.tail.empty());
        if (*stab) return cmd_stability(cfg);
        if (*rt) return cmd_roundtrip(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorCode::solver);
    }
    return 0;
}
