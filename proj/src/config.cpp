#include "ledlink/config.hpp"
#include <json.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ledlink {

using nlohmann::json;

namespace {

json default_json() {
    ExperimentConfig def;
    return json::parse(def.to_json_text());
}

// Recursive merge: objects merge key-wise, everything else is replaced.
void merge(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) { base = patch; return; }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key())) merge(base[it.key()], it.value());
        else base[it.key()] = it.value();
    }
}

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (!v.is_discarded()) return v;
    return json(text);  // unquoted strings pass through verbatim
}

template <typename T>
T require(const json& j, const char* group, const char* key) {
    try {
        return j.at(group).at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field ") + group + "." + key + ": " + e.what());
    }
}

} // namespace

const char* sigma_mode_name(SigmaMode mode) {
    return mode == SigmaMode::as_written ? "as_written" : "corrected";
}

SigmaMode sigma_mode_from_name(const std::string& name) {
    if (name == "as_written") return SigmaMode::as_written;
    if (name == "corrected") return SigmaMode::corrected;
    throw ConfigError("unknown sigma mode '" + name + "' (expected as_written or corrected)");
}

std::vector<double> ExperimentConfig::beta_grid(int n) const {
    std::vector<double> out(beta_points);
    if (beta_points == 1) { out[0] = beta_over_n_min * n; return out; }
    const double ratio = std::pow(beta_over_n_max / beta_over_n_min,
                                  1.0 / (beta_points - 1));
    for (int i = 0; i < beta_points; ++i)
        out[i] = beta_over_n_min * std::pow(ratio, i) * n;
    return out;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["channel"] = {{"f3db_hz", f3db_hz}};
    j["noise"] = {{"n0_mw_per_hz", n0_mw_per_hz}};
    j["ber"] = {{"target", ber_target}};
    j["sweep"] = {{"powers_mw", powers_mw}};
    j["ofdm"] = {
        {"n_subcarriers", ofdm_n},
        {"n_list", ofdm_n_list},
        {"t_grid_s", t_grid_s},
        {"beta_over_n_min", beta_over_n_min},
        {"beta_over_n_max", beta_over_n_max},
        {"beta_points", beta_points},
        {"qam_sizes", qam_sizes},
        {"cyclic_prefix", cyclic_prefix},
        {"qam_second_moment", qam_second_moment},
        {"fig3_t_s", fig3_t_s},
        {"fig3_power_mw", fig3_power_mw},
    };
    j["pam"] = {
        {"l_f", l_f},
        {"m_grid", m_grid},
        {"rc_grid_sps", rc_grid_sps},
        {"sigma_mode_equalized", sigma_mode_name(mode_equalized)},
        {"sigma_mode_unequalized", sigma_mode_name(mode_unequalized)},
        {"design", {
            {"max_iters", design.max_iters},
            {"rel_tol", design.rel_tol},
            {"kkt_tol", design.kkt_tol},
            {"grad_step_rel", design.grad_step_rel},
            {"seed_levels", design.seed_levels},
            {"random_seed", design.random_seed},
            {"polish_iters", design.polish_iters},
        }},
    };
    j["montecarlo"] = {
        {"seed", mc_seed},
        {"min_errors", mc_min_errors},
        {"max_symbols", mc_max_symbols},
        {"simulate_sweeps", simulate_sweeps},
    };
    j["output"] = {{"dir", out_dir}, {"threads", threads}};
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::load(const std::string& json_path,
                                        const std::vector<std::string>& overrides) {
    json j = default_json();
    if (!json_path.empty()) {
        std::ifstream in(json_path);
        if (!in) throw ConfigError("cannot open config file: " + json_path);
        json file = json::parse(in, nullptr, false);
        if (file.is_discarded()) throw ConfigError("config file is not valid JSON: " + json_path);
        merge(j, file);
    }
    for (const std::string& expr : overrides) {
        const auto eq = expr.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like group.key=value: " + expr);
        const std::string path = expr.substr(0, eq);
        json* node = &j;
        std::istringstream keys(path);
        std::string key;
        while (std::getline(keys, key, '.')) {
            if (key.empty()) throw ConfigError("bad override path: " + expr);
            node = &(*node)[key];
        }
        *node = parse_override_value(expr.substr(eq + 1));
    }

    ExperimentConfig c;
    c.f3db_hz = require<double>(j, "channel", "f3db_hz");
    c.n0_mw_per_hz = require<double>(j, "noise", "n0_mw_per_hz");
    c.ber_target = require<double>(j, "ber", "target");
    c.powers_mw = require<std::vector<double>>(j, "sweep", "powers_mw");
    c.ofdm_n = require<int>(j, "ofdm", "n_subcarriers");
    c.ofdm_n_list = require<std::vector<int>>(j, "ofdm", "n_list");
    c.t_grid_s = require<std::vector<double>>(j, "ofdm", "t_grid_s");
    c.beta_over_n_min = require<double>(j, "ofdm", "beta_over_n_min");
    c.beta_over_n_max = require<double>(j, "ofdm", "beta_over_n_max");
    c.beta_points = require<int>(j, "ofdm", "beta_points");
    c.qam_sizes = require<std::vector<int>>(j, "ofdm", "qam_sizes");
    c.cyclic_prefix = require<bool>(j, "ofdm", "cyclic_prefix");
    c.qam_second_moment = require<double>(j, "ofdm", "qam_second_moment");
    c.fig3_t_s = require<double>(j, "ofdm", "fig3_t_s");
    c.fig3_power_mw = require<double>(j, "ofdm", "fig3_power_mw");
    c.l_f = require<int>(j, "pam", "l_f");
    c.m_grid = require<std::vector<int>>(j, "pam", "m_grid");
    c.rc_grid_sps = require<std::vector<double>>(j, "pam", "rc_grid_sps");
    c.mode_equalized = sigma_mode_from_name(require<std::string>(j, "pam", "sigma_mode_equalized"));
    c.mode_unequalized = sigma_mode_from_name(require<std::string>(j, "pam", "sigma_mode_unequalized"));
    const json& d = j.at("pam").at("design");
    try {
        c.design.max_iters = d.at("max_iters").get<int>();
        c.design.rel_tol = d.at("rel_tol").get<double>();
        c.design.kkt_tol = d.at("kkt_tol").get<double>();
        c.design.grad_step_rel = d.at("grad_step_rel").get<double>();
        c.design.seed_levels = d.at("seed_levels").get<std::vector<double>>();
        c.design.random_seed = d.at("random_seed").get<uint64_t>();
        c.design.polish_iters = d.at("polish_iters").get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field pam.design: ") + e.what());
    }
    c.mc_seed = require<uint64_t>(j, "montecarlo", "seed");
    c.mc_min_errors = require<uint64_t>(j, "montecarlo", "min_errors");
    c.mc_max_symbols = require<uint64_t>(j, "montecarlo", "max_symbols");
    c.simulate_sweeps = require<bool>(j, "montecarlo", "simulate_sweeps");
    c.out_dir = require<std::string>(j, "output", "dir");
    c.threads = require<int>(j, "output", "threads");

    // Consistency checks: every constraint here is a hard config error.
    if (c.f3db_hz <= 0) throw ConfigError("channel.f3db_hz must be positive");
    if (c.n0_mw_per_hz < 0) throw ConfigError("noise.n0_mw_per_hz must be non-negative");
    if (c.ber_target <= 0 || c.ber_target >= 1) throw ConfigError("ber.target must be in (0, 1)");
    if (c.powers_mw.empty()) throw ConfigError("sweep.powers_mw must be non-empty");
    for (double p : c.powers_mw)
        if (p <= 0) throw ConfigError("sweep.powers_mw entries must be positive");
    auto power_of_two = [](int v) { return v > 1 && (v & (v - 1)) == 0; };
    if (!power_of_two(c.ofdm_n)) throw ConfigError("ofdm.n_subcarriers must be a power of two > 1");
    for (int nn : c.ofdm_n_list)
        if (!power_of_two(nn)) throw ConfigError("ofdm.n_list entries must be powers of two > 1");
    if (c.t_grid_s.empty()) throw ConfigError("ofdm.t_grid_s must be non-empty");
    for (double t : c.t_grid_s)
        if (t <= 0) throw ConfigError("ofdm.t_grid_s entries must be positive");
    if (c.beta_over_n_min <= 0 || c.beta_over_n_max < c.beta_over_n_min)
        throw ConfigError("ofdm beta range must satisfy 0 < min <= max");
    if (c.beta_points < 1) throw ConfigError("ofdm.beta_points must be at least 1");
    if (c.qam_sizes.empty()) throw ConfigError("ofdm.qam_sizes must be non-empty");
    if (c.qam_second_moment != 1.0 && c.qam_second_moment != 0.5)
        throw ConfigError("ofdm.qam_second_moment must be 1.0 or 0.5");
    if (c.fig3_t_s <= 0 || c.fig3_power_mw <= 0)
        throw ConfigError("ofdm fig3 point must have positive time and power");
    if (c.l_f < 1) throw ConfigError("pam.l_f must be positive");
    if (c.m_grid.empty()) throw ConfigError("pam.m_grid must be non-empty");
    for (int m : c.m_grid)
        if (m < 2 || (m & (m - 1)) != 0) throw ConfigError("pam.m_grid entries must be powers of two >= 2");
    if (c.rc_grid_sps.empty()) throw ConfigError("pam.rc_grid_sps must be non-empty");
    for (double rc : c.rc_grid_sps)
        if (rc <= 0) throw ConfigError("pam.rc_grid_sps entries must be positive");
    if (c.design.max_iters < 1 || c.design.polish_iters < 0)
        throw ConfigError("pam.design iteration budgets must be positive");
    if (c.design.rel_tol < 0 || c.design.kkt_tol <= 0 || c.design.grad_step_rel <= 0)
        throw ConfigError("pam.design tolerances must be positive");
    if (c.mc_max_symbols == 0) throw ConfigError("montecarlo.max_symbols must be positive");
    if (c.threads < 0) throw ConfigError("output.threads must be >= 0");
    return c;
}

} // namespace ledlink
