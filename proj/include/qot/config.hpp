#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qot/errors.hpp"

namespace qot {

struct ExperimentConfig {
    std::string command;
    std::string family = "identity";
    double family_a = 2.0;
    double family_b = 0.0;
    double family_eta = 0.02;
    int d = 1;
    int n = 200;
    std::vector<double> eps_list;
    double delta = 0.1;
    double tol = 1e-9;
    int max_iter = 20000;
    double pme_m = 2.0;
    std::string output_dir = ".";
    unsigned seed = 0;
};

namespace detail {

inline double parse_positive(const std::string& s, const char* field) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size() || !(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(field) + ": expected a positive number, got '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(std::string(field) + ": expected a positive number, got '" + s + "'");
    }
}

}  // namespace detail

// eps accepts a single value, a comma list, or "hi:lo:COUNTlog" for COUNT log-spaced
// values, endpoints inclusive, always returned strictly decreasing.
inline std::vector<double> parse_eps_list(const std::string& text) {
    if (text.empty()) throw ConfigError("eps: empty value");
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::size_t p1 = text.find(':');
        std::size_t p2 = text.find(':', p1 + 1);
        if (p2 == std::string::npos)
            throw ConfigError("eps: range form is HI:LO:COUNTlog, got '" + text + "'");
        double hi = detail::parse_positive(text.substr(0, p1), "eps");
        double lo = detail::parse_positive(text.substr(p1 + 1, p2 - p1 - 1), "eps");
        std::string tail = text.substr(p2 + 1);
        if (tail.size() < 4 || tail.substr(tail.size() - 3) != "log")
            throw ConfigError("eps: range count must end in 'log', got '" + text + "'");
        int count = 0;
        try {
            std::size_t used = 0;
            count = std::stoi(tail.substr(0, tail.size() - 3), &used);
            if (used != tail.size() - 3) throw ConfigError("eps: bad range count in '" + text + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            throw ConfigError("eps: bad range count in '" + text + "'");
        }
        if (count < 2) throw ConfigError("eps: range needs at least 2 values");
        if (!(hi > lo)) throw ConfigError("eps: range must go from larger to smaller");
        double lh = std::log(hi), ll = std::log(lo);
        for (int k = 0; k < count; ++k)
            out.push_back(std::exp(lh + (ll - lh) * k / (count - 1)));
        out.front() = hi;
        out.back() = lo;
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t comma = text.find(',', pos);
            std::string item =
                comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
            out.push_back(detail::parse_positive(item, "eps"));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    for (std::size_t k = 1; k < out.size(); ++k)
        if (!(out[k] < out[k - 1]))
            throw ConfigError("eps: list must be strictly decreasing");
    return out;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.d < 1 || cfg.d > 3) throw ConfigError("d: must be 1, 2, or 3");
    if (cfg.n < 2) throw ConfigError("n: must be at least 2");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol: must be positive");
    if (cfg.max_iter < 1) throw ConfigError("max_iter: must be positive");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta: must be positive");
    if (!(cfg.pme_m > 1.0)) throw ConfigError("m: must exceed 1");
    if (cfg.family != "identity" && cfg.family != "affine" && cfg.family != "perturbed")
        throw ConfigError("family: unknown family '" + cfg.family +
                          "' (expected identity, affine, or perturbed)");
    if (cfg.family == "affine" && !(cfg.family_a > 0.0))
        throw ConfigError("a: affine scale must be positive");
}

inline std::string config_echo(const ExperimentConfig& cfg) {
    auto g = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", v);
        return std::string(buf);
    };
    std::string s = "command=" + cfg.command + " family=" + cfg.family;
    if (cfg.family == "affine") s += " a=" + g(cfg.family_a) + " b=" + g(cfg.family_b);
    if (cfg.family == "perturbed") s += " eta=" + g(cfg.family_eta);
    s += " d=" + std::to_string(cfg.d) + " n=" + std::to_string(cfg.n);
    if (!cfg.eps_list.empty()) {
        s += " eps=";
        for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
            if (k) s += ",";
            s += g(cfg.eps_list[k]);
        }
    }
    s += " delta=" + g(cfg.delta) + " tol=" + g(cfg.tol) +
         " max_iter=" + std::to_string(cfg.max_iter) + " seed=" + std::to_string(cfg.seed);
    return s;
}

// Calls fn(integral_constant<int, d>) for runtime d in {1, 2, 3}.
template <class Fn>
auto dispatch_dim(int d, Fn&& fn) {
    switch (d) {
        case 1:
            return fn(std::integral_constant<int, 1>{});
        case 2:
            return fn(std::integral_constant<int, 2>{});
        case 3:
            return fn(std::integral_constant<int, 3>{});
        default:
            throw UnsupportedDimension("dispatch_dim: d must be 1, 2, or 3");
    }
}

}  // namespace qot
