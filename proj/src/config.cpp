// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "radar_lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "radar_lab/errors.hpp"

namespace radar_lab {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    require_object(j, where);
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return get<T>(j, key, where, T{});
}

cplx parse_complex(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_object()) {
        check_keys(j, where, {"mag", "phase_rad"});
        return std::polar(require<double>(j, "mag", where), get<double>(j, "phase_rad", where, 0.0));
    }
    throw ConfigError(where + ": expected a number, [re, im] or {mag, phase_rad}");
}

Eigen::Vector2d parse_vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::Vector4d parse_vec4(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": expected 4 numbers");
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where + ": expected 4 numbers");
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

WaveformSpec parse_waveform(const json& j, std::uint64_t& seed) {
    const std::string w = "waveform";
    check_keys(j, w, {"bandwidth_hz", "sample_rate_hz", "n_samples", "max_delay_samples", "power", "seed"});
    WaveformSpec s;
    s.bandwidth_hz = require<double>(j, "bandwidth_hz", w);
    s.sample_rate_hz = require<double>(j, "sample_rate_hz", w);
    s.n_samples = require<int>(j, "n_samples", w);
    s.max_delay_samples = require<int>(j, "max_delay_samples", w);
    s.power = get<double>(j, "power", w, 1.0);
    seed = get<std::uint64_t>(j, "seed", w, 1);
    s.validate();
    return s;
}

LinkBudget parse_link(const json& j, const std::string& where) {
    check_keys(j, where, {"transmit_power_w", "rcs_m2", "rc_gain", "sc_gain", "sc_direct_path_gain", "phase_seed"});
    LinkBudget l;
    l.transmit_power_w = get<double>(j, "transmit_power_w", where, l.transmit_power_w);
    l.rcs_m2 = get<double>(j, "rcs_m2", where, l.rcs_m2);
    l.rc_gain = get<double>(j, "rc_gain", where, l.rc_gain);
    l.sc_gain = get<double>(j, "sc_gain", where, l.sc_gain);
    l.sc_direct_path_gain = get<double>(j, "sc_direct_path_gain", where, l.sc_direct_path_gain);
    l.phase_seed = get<std::uint64_t>(j, "phase_seed", where, l.phase_seed);
    return l;
}

TargetState parse_target(const json& j, const std::string& where) {
    check_keys(j, where, {"position", "velocity"});
    TargetState t;
    t.position = parse_vec2(require<json>(j, "position", where), where + ".position");
    t.velocity = parse_vec2(require<json>(j, "velocity", where), where + ".velocity");
    t.validate();
    return t;
}

NodeGeometry parse_node_geometry(const json& j, const std::string& where) {
    NodeGeometry g;
    g.io_position = parse_vec2(require<json>(j, "io_position", where), where + ".io_position");
    g.rn_position = parse_vec2(require<json>(j, "rn_position", where), where + ".rn_position");
    g.carrier_frequency_hz = get<double>(j, "carrier_hz", where, g.carrier_frequency_hz);
    g.validate();
    return g;
}

struct ClutterSection {
    int n_taps = 0;
    std::optional<std::vector<cplx>> coeffs;
    double power_rel_dpi_db = -10.0;
    double decay = 0.8;
    std::uint64_t seed = 7;

    std::vector<cplx> realize(cplx b) const {
        if (coeffs) return *coeffs;
        return clutter_profile(b, n_taps, power_rel_dpi_db, decay, seed);
    }
};

ClutterSection parse_clutter(const json& j) {
    const std::string w = "clutter";
    check_keys(j, w, {"n_taps", "coeffs", "power_rel_dpi_db", "decay", "seed"});
    ClutterSection c;
    c.n_taps = require<int>(j, "n_taps", w);
    if (c.n_taps < 0) throw ConfigError("clutter.n_taps must be non-negative");
    if (j.contains("coeffs")) {
        const json& arr = j.at("coeffs");
        if (!arr.is_array()) throw ConfigError("clutter.coeffs: expected an array");
        std::vector<cplx> v;
        for (std::size_t i = 0; i < arr.size(); ++i) v.push_back(parse_complex(arr[i], "clutter.coeffs"));
        if (static_cast<int>(v.size()) != c.n_taps)
            throw ConfigError("clutter.coeffs: length " + std::to_string(v.size()) + " does not match n_taps " +
                              std::to_string(c.n_taps));
        c.coeffs = std::move(v);
    }
    c.power_rel_dpi_db = get<double>(j, "power_rel_dpi_db", w, c.power_rel_dpi_db);
    c.decay = get<double>(j, "decay", w, c.decay);
    c.seed = get<std::uint64_t>(j, "seed", w, c.seed);
    if (!(c.decay > 0.0)) throw ConfigError("clutter.decay must be positive");
    return c;
}

}  // namespace

std::vector<cplx> clutter_profile(cplx b, int n_taps, double power_rel_dpi_db, double decay, std::uint64_t seed) {
    std::vector<cplx> c;
    if (n_taps <= 0) return c;
    RngStream rng(seed, {0xC1u});
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    double energy = 0.0;
    for (int l = 0; l < n_taps; ++l) {
        c.push_back(std::polar(std::pow(decay, l), phase(rng.engine())));
        energy += std::norm(c.back());
    }
    const double target = std::norm(b) * db_to_linear(power_rel_dpi_db);
    const double g = std::sqrt(target / energy);
    for (auto& v : c) v *= g;
    return c;
}

namespace {

RunConfig parse_config_impl(const json& input) {
    require_object(input, "config");
    const json& doc = input.contains("config") && input.contains("config_hash") ? input.at("config") : input;
    check_keys(doc, "config",
               {"schema_version", "name", "waveform", "scenario", "geometry", "clutter", "noise", "grid", "campaign",
                "analysis"});
    const int version = get<int>(doc, "schema_version", "config", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(version));

    RunConfig rc;
    rc.resolved = doc;
    rc.name = get<std::string>(doc, "name", "config", "custom");
    CampaignConfig& cc = rc.campaign;

    cc.scenario.waveform_spec = parse_waveform(require<json>(doc, "waveform", "config"), cc.waveform_seed);
    const WaveformSpec& spec = cc.scenario.waveform_spec;
    const ClutterSection clutter = parse_clutter(doc.contains("clutter") ? doc.at("clutter") : json{{"n_taps", 0}});

    const bool has_scenario = doc.contains("scenario");
    const bool has_geometry = doc.contains("geometry");
    if (has_scenario == has_geometry) throw ConfigError("config: give exactly one of 'scenario' or 'geometry'");

    if (has_scenario) {
        const json& s = doc.at("scenario");
        const std::string w = "scenario";
        check_keys(s, w, {"a", "b", "d", "tau_samples", "tau_s", "omega_bins", "omega_rad_s"});
        cc.scenario.a = parse_complex(require<json>(s, "a", w), "scenario.a");
        cc.scenario.b = s.contains("b") ? parse_complex(s.at("b"), "scenario.b") : cplx{};
        cc.scenario.d = parse_complex(require<json>(s, "d", w), "scenario.d");
        if (s.contains("tau_samples") == s.contains("tau_s"))
            throw ConfigError("scenario: give exactly one of tau_samples or tau_s");
        if (s.contains("omega_bins") == s.contains("omega_rad_s"))
            throw ConfigError("scenario: give exactly one of omega_bins or omega_rad_s");
        cc.scenario.target.tau =
            s.contains("tau_s") ? get<double>(s, "tau_s", w, 0.0) : get<double>(s, "tau_samples", w, 0.0) * spec.dt();
        cc.scenario.target.omega = s.contains("omega_rad_s") ? get<double>(s, "omega_rad_s", w, 0.0)
                                                             : get<double>(s, "omega_bins", w, 0.0) * spec.doppler_bin();
        cc.scenario.clutter_coeffs = clutter.realize(cc.scenario.b);
    } else {
        const json& g = doc.at("geometry");
        const std::string w = "geometry";
        require_object(g, w);
        const TargetState target = parse_target(require<json>(g, "target", w), "geometry.target");
        if (g.contains("nodes")) {
            check_keys(g, w, {"target", "nodes", "theta_grid"});
            GlobalCampaign gc;
            gc.target = target;
            const json& nodes = g.at("nodes");
            if (!nodes.is_array()) throw ConfigError("geometry.nodes: expected an array");
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                const std::string wk = "geometry.nodes[" + std::to_string(k) + "]";
                check_keys(nodes[k], wk, {"io_position", "rn_position", "carrier_hz", "link"});
                CampaignNode cn;
                cn.geometry = parse_node_geometry(nodes[k], wk);
                cn.link = parse_link(nodes[k].contains("link") ? nodes[k].at("link") : json::object(), wk + ".link");
                cn.clutter_coeffs = clutter.realize(bistatic_amplitudes(cn.geometry, target, cn.link).b);
                gc.nodes.push_back(std::move(cn));
            }
            gc.grid.center = target.as_vector();
            const json tg = g.contains("theta_grid") ? g.at("theta_grid") : json::object();
            check_keys(tg, "geometry.theta_grid", {"center", "half_width", "points"});
            if (tg.contains("center")) gc.grid.center = parse_vec4(tg.at("center"), "geometry.theta_grid.center");
            gc.grid.half_width = tg.contains("half_width") ? parse_vec4(tg.at("half_width"), "geometry.theta_grid.half_width")
                                                           : Eigen::Vector4d(20.0, 20.0, 10.0, 10.0);
            if (tg.contains("points")) {
                const Eigen::Vector4d p = parse_vec4(tg.at("points"), "geometry.theta_grid.points");
                for (int i = 0; i < 4; ++i) {
                    if (p(i) < 1.0) throw ConfigError("geometry.theta_grid.points must be positive");
                    gc.grid.points[static_cast<std::size_t>(i)] = static_cast<int>(p(i));
                }
            }
            // Node 0 also defines the SNR reference scenario.
            const Amplitudes amp = bistatic_amplitudes(gc.nodes[0].geometry, target, gc.nodes[0].link);
            cc.scenario.a = amp.a;
            cc.scenario.b = amp.b;
            cc.scenario.d = amp.d;
            cc.scenario.clutter_coeffs = gc.nodes[0].clutter_coeffs;
            cc.scenario.target = delay_doppler(gc.nodes[0].geometry, target);
            rc.target = target;
            cc.global = std::move(gc);
        } else {
            check_keys(g, w, {"io_position", "rn_position", "carrier_hz", "target", "link"});
            const NodeGeometry geo = parse_node_geometry(g, w);
            const LinkBudget link = parse_link(g.contains("link") ? g.at("link") : json::object(), "geometry.link");
            const Amplitudes amp = bistatic_amplitudes(geo, target, link);
            cc.scenario.a = amp.a;
            cc.scenario.b = amp.b;
            cc.scenario.d = amp.d;
            cc.scenario.target = delay_doppler(geo, target);
            cc.scenario.clutter_coeffs = clutter.realize(amp.b);
            rc.geometry = geo;
            rc.target = target;
        }
    }
    if (cc.scenario.n_taps() != clutter.n_taps) throw ConfigError("clutter: coefficient count mismatch");

    const json noise = doc.contains("noise") ? doc.at("noise") : json::object();
    check_keys(noise, "noise", {"sc_snr_db", "rc_snr_db"});
    // null selects a noise-free channel
    auto snr = [&](const char* key, double fallback) {
        if (noise.contains(key) && noise.at(key).is_null()) return std::numeric_limits<double>::infinity();
        return get<double>(noise, key, "noise", fallback);
    };
    cc.sc_snr_db = snr("sc_snr_db", cc.sc_snr_db);
    cc.rc_snr_db = snr("rc_snr_db", cc.rc_snr_db);

    const json grid = doc.contains("grid") ? doc.at("grid") : json::object();
    check_keys(grid, "grid",
               {"tau_min_samples", "tau_max_samples", "tau_step_samples", "omega_min_bins", "omega_max_bins",
                "omega_step_bins"});
    GridSpec& gs = cc.grid;
    gs.tau_min_samples = get<double>(grid, "tau_min_samples", "grid", gs.tau_min_samples);
    gs.tau_max_samples = get<double>(grid, "tau_max_samples", "grid", gs.tau_max_samples);
    gs.tau_step_samples = get<double>(grid, "tau_step_samples", "grid", gs.tau_step_samples);
    gs.omega_min_bins = get<double>(grid, "omega_min_bins", "grid", gs.omega_min_bins);
    gs.omega_max_bins = get<double>(grid, "omega_max_bins", "grid", gs.omega_max_bins);
    gs.omega_step_bins = get<double>(grid, "omega_step_bins", "grid", gs.omega_step_bins);
    make_axes(gs, spec);

    const json camp = doc.contains("campaign") ? doc.at("campaign") : json::object();
    const std::string w = "campaign";
    check_keys(camp, w,
               {"n_trials", "sweep_axis", "sweep_values", "root_seed", "refine", "polish_factor", "tolerance",
                "max_iterations"});
    cc.n_trials = get<int>(camp, "n_trials", w, cc.n_trials);
    cc.sweep_axis = sweep_axis_from_string(get<std::string>(camp, "sweep_axis", w, "none"));
    cc.sweep_values = get<std::vector<double>>(camp, "sweep_values", w, {});
    cc.root_seed = get<std::uint64_t>(camp, "root_seed", w, cc.root_seed);
    cc.estimate.refine = get<bool>(camp, "refine", w, cc.estimate.refine);
    cc.estimate.polish_factor = get<double>(camp, "polish_factor", w, cc.estimate.polish_factor);
    cc.estimate.refine_options.tolerance = get<double>(camp, "tolerance", w, cc.estimate.refine_options.tolerance);
    cc.estimate.refine_options.max_iterations =
        get<int>(camp, "max_iterations", w, cc.estimate.refine_options.max_iterations);

    const json an = doc.contains("analysis") ? doc.at("analysis") : json::object();
    check_keys(an, "analysis", {"error_map"});
    const std::string variant = get<std::string>(an, "error_map", "analysis", "verbatim");
    if (variant == "verbatim")
        cc.variant = ErrorMapVariant::verbatim;
    else if (variant == "shifted")
        cc.variant = ErrorMapVariant::shifted;
    else
        throw ConfigError("analysis.error_map: expected 'verbatim' or 'shifted'");

    cc.validate();
    return rc;
}

}  // namespace

RunConfig parse_config(const json& input) {
    // Invalid geometry or an unidentifiable node layout is a configuration problem.
    try {
        return parse_config_impl(input);
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    } catch (const IdentifiabilityError& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

std::vector<std::string> preset_names() { return {"desk", "fig1a", "fig1b", "tiny"}; }

json preset_json(const std::string& name, bool full_scale) {
    const std::vector<std::string> names = preset_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown preset '" + name + "' (expected desk, fig1a, fig1b or tiny)");
    int n = full_scale ? 8192 : 4096;
    int m = full_scale ? 80 : 32;
    int l = full_scale ? 70 : 16;
    int trials = full_scale ? 2500 : 300;
    if (name == "tiny") {
        n = 512;
        m = 16;
        l = 4;
        trials = 20;
    }
    json doc = {
        {"schema_version", kConfigSchemaVersion},
        {"name", full_scale && name != "tiny" ? name + "_full" : name},
        {"waveform",
         {{"bandwidth_hz", 8e6},
          {"sample_rate_hz", 25e6},
          {"n_samples", n},
          {"max_delay_samples", m},
          {"power", 1.0},
          {"seed", 1}}},
        {"geometry",
         {{"io_position", {0.0, 0.0}},
          {"rn_position", {10000.0, 0.0}},
          {"carrier_hz", 600e6},
          {"target", {{"position", {10050.0, 10.0}}, {"velocity", {-248.0, -30.0}}}},
          {"link",
           {{"transmit_power_w", 1.0},
            {"rcs_m2", 10.0},
            {"rc_gain", 1.0},
            {"sc_gain", 1.0},
            {"sc_direct_path_gain", 0.01},
            {"phase_seed", 3}}}}},
        {"clutter", {{"n_taps", l}, {"power_rel_dpi_db", -10.0}, {"decay", 0.8}, {"seed", 11}}},
        {"noise", {{"sc_snr_db", 15.0}, {"rc_snr_db", 75.0}}},
        {"grid",
         {{"tau_min_samples", 0.0},
          {"tau_max_samples", m},
          {"tau_step_samples", 1.0},
          {"omega_min_bins", -2.0},
          {"omega_max_bins", 2.0},
          {"omega_step_bins", 0.5}}},
        {"campaign", {{"n_trials", trials}, {"sweep_axis", "none"}, {"sweep_values", json::array()}, {"root_seed", 1}}},
        {"analysis", {{"error_map", "verbatim"}}},
    };
    if (name == "fig1a") {
        doc["campaign"]["sweep_axis"] = "sc_snr_db";
        doc["campaign"]["sweep_values"] = {-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0};
    } else if (name == "fig1b") {
        doc["campaign"]["sweep_axis"] = "rc_snr_db";
        doc["campaign"]["sweep_values"] = {30.0, 40.0, 50.0, 60.0, 75.0};
    }
    return doc;
}

std::string config_hash(const json& resolved) {
    const std::string text = resolved.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace radar_lab
