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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "radar_lab/analysis.hpp"
#include "radar_lab/config.hpp"
#include "radar_lab/errors.hpp"
#include "radar_lab/estimator.hpp"
#include "radar_lab/mc_harness.hpp"

using nlohmann::json;
using namespace radar_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
    std::string config_path;
    std::string preset;
    bool full_scale = false;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

RunConfig resolve(const CommonOptions& o) {
    json doc;
    if (!o.config_path.empty() && !o.preset.empty()) throw ConfigError("give either --config or --preset, not both");
    if (!o.preset.empty()) {
        doc = preset_json(o.preset, o.full_scale);
    } else if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("cannot open config file '" + o.config_path + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("malformed JSON in '" + o.config_path + "': " + e.what());
        }
        if (doc.is_object() && doc.contains("config") && doc.contains("config_hash")) doc = doc.at("config");
    } else {
        throw ConfigError("a config is required: use --config PATH or --preset NAME");
    }
    if (o.seed) {
        if (!doc.is_object()) throw ConfigError("config: expected an object");
        doc["campaign"]["root_seed"] = *o.seed;
    }
    RunConfig rc = parse_config(doc);
    rc.campaign.threads = o.threads;
    return rc;
}

// Writes via a temporary file so that failures leave no partial output.
void write_atomically(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + path + "'");
        out << text;
        if (!out) throw Error("failed while writing '" + path + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_manifest(const std::string& out_path, const std::string& command, const RunConfig& rc,
                    const std::string& started) {
    const json manifest = {
        {"manifest_version", 1},
        {"tool", "radar_lab"},
        {"tool_version", kToolVersion},
        {"command", command},
        {"config_hash", config_hash(rc.resolved)},
        {"root_seed", rc.campaign.root_seed},
        {"started_utc", started},
        {"finished_utc", utc_now()},
        {"outputs", {out_path}},
        {"config", rc.resolved},
    };
    write_atomically(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

std::string require_out(const CommonOptions& o) {
    if (o.out_path.empty()) throw ConfigError("--out PATH is required");
    return o.out_path;
}

int cmd_surface(const CommonOptions& o) {
    const std::string started = utc_now();
    const RunConfig rc = resolve(o);
    const std::string out = require_out(o);
    const CampaignConfig& cc = rc.campaign;
    if (cc.global) throw ConfigError("surface: multi-node configs are not supported; give a single-node config");
    NodeScenario sc = cc.scenario;
    sc.sigma_e2 = noise_variance(sc.d, cc.sc_snr_db);
    sc.sigma_n2 = noise_variance(sc.a, cc.rc_snr_db);
    const IoWaveform w = generate_waveform(sc.waveform_spec, cc.waveform_seed);
    const NodeProcessor proc(synthesize(w, sc, RngStream::derive_seed(cc.root_seed, {0, 0})), sc.n_taps());
    const AmbiguitySurface s = ambiguity_surface(proc, make_axes(cc.grid, sc.waveform_spec));

    std::ostringstream csv;
    csv << "tau_s,omega_rad_s,value,masked\n";
    for (std::size_t i = 0; i < s.tau_axis.size(); ++i)
        for (std::size_t j = 0; j < s.omega_axis.size(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            csv << num(s.tau_axis[i]) << ',' << num(s.omega_axis[j]) << ',' << num(s.values(ii, jj)) << ','
                << (s.masked(ii, jj) ? 1 : 0) << '\n';
        }
    write_atomically(out, csv.str());
    write_manifest(out, "surface", rc, started);
    return kExitOk;
}

int cmd_montecarlo(const CommonOptions& o) {
    const std::string started = utc_now();
    const RunConfig rc = resolve(o);
    const std::string out = require_out(o);
    const McReport report = run_campaign(rc.campaign);

    std::vector<std::string> keys;
    if (rc.campaign.global)
        keys = {"x", "y", "vx", "vy"};
    else
        keys = {"tau", "omega"};
    const std::vector<std::string> units = rc.campaign.global ? std::vector<std::string>{"_m", "_m", "_m_s", "_m_s"}
                                                              : std::vector<std::string>{"_s", "_rad_s"};
    std::ostringstream csv;
    csv << "sweep_db";
    for (std::size_t k = 0; k < keys.size(); ++k) csv << ",rmse_" << keys[k] << units[k];
    for (const auto& k : keys) csv << ",sqrt_crb_" << k;
    for (const auto& k : keys) csv << ",sqrt_total_" << k;
    csv << ",n_ok,n_outlier\n";
    for (const auto& p : report.points) {
        csv << num(p.sweep_db);
        for (double v : p.stats.rmse) csv << ',' << num(v);
        for (double v : p.sqrt_crb) csv << ',' << num(v);
        for (double v : p.sqrt_total) csv << ',' << num(v);
        csv << ',' << p.stats.n_ok << ',' << p.stats.n_outlier << '\n';
        std::cerr << "sweep " << p.sweep_db << " dB: " << p.stats.n_ok << " ok, " << p.stats.n_outlier
                  << " outliers, " << p.wall_seconds << " s\n";
    }
    write_atomically(out, csv.str());
    write_manifest(out, "montecarlo", rc, started);
    return kExitOk;
}

int cmd_analyze(const CommonOptions& o) {
    const std::string started = utc_now();
    const RunConfig rc = resolve(o);
    const std::string out = require_out(o);
    const CampaignConfig& cc = rc.campaign;
    const auto w = std::make_shared<const IoWaveform>(generate_waveform(cc.scenario.waveform_spec, cc.waveform_seed));

    AnalysisSetup setup;
    setup.variant = cc.variant;
    double sigma_e2 = 0.0;
    double sigma_n2 = 0.0;
    if (cc.global) {
        setup.target = cc.global->target;
        sigma_e2 = noise_variance(cc.scenario.d, cc.sc_snr_db);
        sigma_n2 = noise_variance(cc.scenario.a, cc.rc_snr_db);
        for (const auto& n : cc.global->nodes) {
            NodeScenario sc = cc.scenario;
            const Amplitudes amp = bistatic_amplitudes(n.geometry, cc.global->target, n.link);
            sc.a = amp.a;
            sc.b = amp.b;
            sc.d = amp.d;
            sc.clutter_coeffs = n.clutter_coeffs;
            setup.nodes.push_back({w, sc, n.geometry});
        }
    } else {
        sigma_e2 = noise_variance(cc.scenario.d, cc.sc_snr_db);
        sigma_n2 = noise_variance(cc.scenario.a, cc.rc_snr_db);
        setup.nodes.push_back({w, cc.scenario, std::nullopt});
    }
    const CovarianceReport r = total_covariance(setup, sigma_e2, sigma_n2);

    json nodes = json::array();
    bool all_ok = true;
    for (const auto& c : r.corollary) {
        const bool ok = c.satisfied(kCorollaryRequiredDb);
        all_ok = all_ok && ok;
        nodes.push_back({{"corollary_lhs", finite_or_null(c.lhs)},
                         {"corollary_rhs", finite_or_null(c.rhs)},
                         {"margin_db", finite_or_null(c.margin_db())},
                         {"corollary_satisfied", ok},
                         {"zj_norm2", c.zj_spectral}});
    }
    const json doc = {
        {"schema_version", 1},
        {"parameters", r.parameters},
        {"sigma_e2", sigma_e2},
        {"sigma_n2", sigma_n2},
        {"error_map", cc.variant == ErrorMapVariant::verbatim ? "verbatim" : "shifted"},
        {"crb", matrix_json(r.crb)},
        {"excess", matrix_json(r.excess)},
        {"total", matrix_json(r.total)},
        {"h", matrix_json(r.h)},
        {"q", matrix_json(r.q)},
        {"required_margin_db", kCorollaryRequiredDb},
        {"corollary_satisfied", all_ok},
        {"nodes", nodes},
    };
    write_atomically(out, doc.dump(2) + "\n");
    write_manifest(out, "analyze", rc, started);
    return kExitOk;
}

int cmd_presets(const std::string& name, bool full_scale) {
    if (name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
        return kExitOk;
    }
    std::cout << preset_json(name, full_scale).dump(2) << '\n';
    return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config_path, "JSON config file (or a run manifest)");
    sub->add_option("--preset", o.preset, "Built-in config: desk, fig1a, fig1b, tiny");
    sub->add_flag("--full-scale", o.full_scale, "Use full-scale preset dimensions (N=8192, L=70, 2500 trials)");
    sub->add_option("--out", o.out_path, "Output file");
    sub->add_option("--seed", o.seed, "Root seed, overrides campaign.root_seed");
    sub->add_option("--threads", o.threads, "Worker threads (default: RADAR_LAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive bistatic radar delay-Doppler estimation and error analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("radar_lab ") + kToolVersion);
    CommonOptions opts;
    auto* surface = app.add_subcommand("surface", "Write the interference-cancelled ambiguity surface as CSV");
    auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo campaign and write per-point RMSE CSV");
    auto* analyze = app.add_subcommand("analyze", "Write CRB, excess and total covariance as JSON");
    auto* presets = app.add_subcommand("presets", "List presets or print one as JSON");
    add_common(surface, opts);
    add_common(mc, opts);
    add_common(analyze, opts);
    std::string preset_name;
    presets->add_option("name", preset_name, "Preset to print");
    presets->add_flag("--full-scale", opts.full_scale, "Print the full-scale variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    try {
        if (*surface) return cmd_surface(opts);
        if (*mc) return cmd_montecarlo(opts);
        if (*analyze) return cmd_analyze(opts);
        return cmd_presets(preset_name, opts.full_scale);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
