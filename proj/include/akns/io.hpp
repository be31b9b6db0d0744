#pragma once

#include "akns/core.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace akns::io {

using nlohmann::json;

inline Error io_error(const std::string& what) { return Error(ErrorCode::io, what); }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw io_error("write failed for '" + path + "'");
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(origin + ": " + e.what());
    }
}

namespace detail {

inline std::vector<double> number_array(const json& j, const char* key, const std::string& origin) {
    if (!j.contains(key) || !j[key].is_array()) throw io_error(origin + ": missing array '" + key + "'");
    std::vector<double> v;
    v.reserve(j[key].size());
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        if (!j[key][i].is_number())
            throw io_error(origin + ": '" + key + "'[" + std::to_string(i) + "] is not a number");
        v.push_back(j[key][i].get<double>());
    }
    return v;
}

inline TailPolicy tail_from(const json& j, const std::string& origin) {
    if (!j.contains("tail_policy")) return TailPolicy::zero_remainder;
    try {
        return parse_tail_policy(j["tail_policy"].get<std::string>());
    } catch (const std::exception& e) {
        throw io_error(origin + ": " + e.what());
    }
}

inline void check_N(const json& j, std::size_t size, const std::string& origin) {
    if (j.contains("N") && j["N"].get<long>() * 2 + 1 != long(size))
        throw io_error(origin + ": N does not match the sequence length");
}

}  // namespace detail

// {"N": 32, "lambda": [...], "mu": [...], "tail_policy": "asymptotic"}
inline json to_json(const SpectralData& d) {
    return {{"N", d.N}, {"lambda", d.lambda}, {"mu", d.mu}, {"tail_policy", to_string(d.tail_policy)}};
}

inline json to_json(const NormingData& d) {
    return {{"N", d.N}, {"lambda", d.lambda}, {"alpha", d.alpha}, {"tail_policy", to_string(d.tail_policy)}};
}

// The tail policy stored in the file wins unless `override_tail` is given.
inline SpectralData spectral_from_json(const json& j, const std::string& origin = "spectral data",
                                       std::optional<TailPolicy> override_tail = {}) {
    auto lam = detail::number_array(j, "lambda", origin);
    auto mu = detail::number_array(j, "mu", origin);
    detail::check_N(j, lam.size(), origin);
    try {
        return SpectralData(std::move(lam), std::move(mu), override_tail.value_or(detail::tail_from(j, origin)));
    } catch (const std::invalid_argument& e) {
        throw io_error(origin + ": " + e.what());
    }
}

inline NormingData norming_from_json(const json& j, const std::string& origin = "norming data",
                                     std::optional<TailPolicy> override_tail = {}) {
    auto lam = detail::number_array(j, "lambda", origin);
    auto al = detail::number_array(j, "alpha", origin);
    detail::check_N(j, lam.size(), origin);
    try {
        return NormingData(std::move(lam), std::move(al), override_tail.value_or(detail::tail_from(j, origin)));
    } catch (const std::invalid_argument& e) {
        throw io_error(origin + ": " + e.what());
    }
}

inline SpectralData read_spectral(const std::string& path, std::optional<TailPolicy> tail = {}) {
    return spectral_from_json(parse_json(read_text(path), path), path, tail);
}

inline NormingData read_norming(const std::string& path, std::optional<TailPolicy> tail = {}) {
    return norming_from_json(parse_json(read_text(path), path), path, tail);
}

// CSV potential: header "x,q1,q3" (optional), then one row per node x_i = i/m.
inline PotentialAKNS parse_potential_csv(const std::string& text, const std::string& origin = "potential") {
    std::istringstream in(text);
    std::string line;
    std::vector<double> xs, a, b;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        if (xs.empty() && a.empty() && line.find_first_of("xq") != std::string::npos) continue;  // header
        std::istringstream row(line);
        std::string cell;
        double v[3];
        int k = 0;
        while (std::getline(row, cell, ',')) {
            if (k == 3) throw io_error(origin + ":" + std::to_string(lineno) + ": more than three columns");
            try {
                std::size_t used = 0;
                v[k] = std::stod(cell, &used);
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw io_error(origin + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "' as a number");
            }
            ++k;
        }
        if (k != 3) throw io_error(origin + ":" + std::to_string(lineno) + ": expected x,q1,q3");
        xs.push_back(v[0]);
        a.push_back(v[1]);
        b.push_back(v[2]);
    }
    if (xs.size() < 2) throw io_error(origin + ": need at least two rows");
    const double m = double(xs.size() - 1);
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(xs[i] - i / m) > 1e-9)
            throw io_error(origin + ": x column is not the uniform grid i/" + std::to_string(xs.size() - 1) +
                           " at data row " + std::to_string(i + 1));
    return PotentialAKNS(std::move(a), std::move(b));
}

inline PotentialAKNS read_potential(const std::string& path) { return parse_potential_csv(read_text(path), path); }

inline std::string potential_csv(const PotentialAKNS& q) {
    std::ostringstream out;
    out.precision(17);
    out << "x,q1,q3\n";
    for (int i = 0; i <= q.m; ++i) out << q.x(i) << ',' << q.q1[i] << ',' << q.q3[i] << '\n';
    return out.str();
}

// flat "key = value" lines, '#' starts a comment
inline std::map<std::string, std::string> parse_config(const std::string& text, const std::string& origin = "config") {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw io_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw io_error(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace akns::io
