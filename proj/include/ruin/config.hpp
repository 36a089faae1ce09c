#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruin/rational_density.hpp"
#include "ruin/sim.hpp"

namespace ruin {

// Scenario file (JSON):
// {
//   "model": { "a":.., "sigma":.., "c":.., "lambda1":.., "lambda2":..,
//              "law1": "exp(1)" | {...}, "law2": ... },
//   "sim":   { "horizon":.., "substep":.., "n_paths":.., "seed":..,
//              "ruin_floor":0, "bridge_correction":false },
//   "u_grid": [1,2,4] | { "u0":.., "factor":2, "count":8 }
// }
// A law is either a preset string -- exp(mu), erlang(k,mu),
// hyperexp([p...],[mu...]) -- or an explicit block with keys
// order, ode_coeffs (ascending), boundary_values (ascending).
struct Scenario {
    ModelParams model;
    SimConfig sim;
    std::vector<double> u_grid;
    std::string raw;  // verbatim file contents, hashed for output provenance
};

namespace detail {

inline std::vector<double> parse_number_list(const std::string& body) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(body);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

inline RationalDensitySpec parse_preset(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("law preset must look like name(args): " + text);
    const std::string name = text.substr(0, open);
    const std::string args = text.substr(open + 1, close - open - 1);
    if (name == "exp") {
        const auto v = parse_number_list(args);
        if (v.size() != 1) throw std::invalid_argument("exp(mu) takes one argument");
        return make_exponential(v[0]);
    }
    if (name == "erlang") {
        const auto v = parse_number_list(args);
        if (v.size() != 2) throw std::invalid_argument("erlang(k, mu) takes two arguments");
        return make_erlang(static_cast<int>(v[0]), v[1]);
    }
    if (name == "hyperexp") {
        const auto lb = args.find('['), rb = args.find(']');
        const auto lb2 = args.find('[', rb), rb2 = args.find(']', lb2);
        if (lb == std::string::npos || rb2 == std::string::npos)
            throw std::invalid_argument("hyperexp(p[], mu[]) takes two bracketed lists");
        return make_hyperexponential(parse_number_list(args.substr(lb + 1, rb - lb - 1)),
                                     parse_number_list(args.substr(lb2 + 1, rb2 - lb2 - 1)));
    }
    throw std::invalid_argument("unknown law preset: " + name);
}

}  // namespace detail

inline RationalDensitySpec parse_law(const nlohmann::json& j) {
    if (j.is_string()) return detail::parse_preset(j.get<std::string>());
    if (j.contains("preset")) {
        const std::string name = j.at("preset").get<std::string>();
        if (name == "exp") return make_exponential(j.at("mu").get<double>());
        if (name == "erlang")
            return make_erlang(j.at("k").get<int>(), j.at("mu").get<double>());
        if (name == "hyperexp")
            return make_hyperexponential(j.at("p").get<std::vector<double>>(),
                                         j.at("mu").get<std::vector<double>>());
        throw std::invalid_argument("unknown law preset: " + name);
    }
    RationalDensitySpec spec;
    spec.order = j.at("order").get<int>();
    spec.ode_coeffs = j.at("ode_coeffs").get<std::vector<double>>();
    spec.boundary_values = j.at("boundary_values").get<std::vector<double>>();
    return spec;
}

inline Scenario parse_scenario(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Scenario sc;
    sc.raw = text;

    const auto& m = j.at("model");
    sc.model.a = m.at("a").get<double>();
    sc.model.sigma = m.at("sigma").get<double>();
    sc.model.c = m.at("c").get<double>();
    sc.model.lambda1 = m.at("lambda1").get<double>();
    sc.model.lambda2 = m.at("lambda2").get<double>();
    sc.model.law1 = parse_law(m.at("law1"));
    sc.model.law2 = parse_law(m.at("law2"));

    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        sc.sim.horizon = s.value("horizon", sc.sim.horizon);
        sc.sim.substep = s.value("substep", sc.sim.substep);
        sc.sim.n_paths = s.value("n_paths", sc.sim.n_paths);
        sc.sim.seed = s.value("seed", sc.sim.seed);
        sc.sim.ruin_floor = s.value("ruin_floor", sc.sim.ruin_floor);
        sc.sim.bridge_correction = s.value("bridge_correction", sc.sim.bridge_correction);
    }

    if (j.contains("u_grid")) {
        const auto& g = j.at("u_grid");
        if (g.is_array()) {
            sc.u_grid = g.get<std::vector<double>>();
        } else {
            const double u0 = g.at("u0").get<double>();
            const double factor = g.value("factor", 2.0);
            const int count = g.value("count", 8);
            double u = u0;
            for (int k = 0; k < count; ++k, u *= factor) sc.u_grid.push_back(u);
        }
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

// FNV-1a over the raw config text; embedded in output headers for provenance.
inline std::uint64_t config_hash(const std::string& raw) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : raw) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace ruin
