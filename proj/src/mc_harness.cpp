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

#include "radar_lab/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "radar_lab/errors.hpp"

namespace radar_lab {

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::sc_snr_db: return "sc_snr_db";
        case SweepAxis::rc_snr_db: return "rc_snr_db";
        case SweepAxis::none: break;
    }
    return "none";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "none") return SweepAxis::none;
    if (name == "sc_snr_db") return SweepAxis::sc_snr_db;
    if (name == "rc_snr_db") return SweepAxis::rc_snr_db;
    throw ConfigError("unknown sweep axis '" + name + "' (expected none, sc_snr_db or rc_snr_db)");
}

double noise_variance(cplx amplitude, double snr_db) {
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("SNR must be a number or +inf");
    if (std::isinf(snr_db)) return 0.0;
    return std::norm(amplitude) / db_to_linear(snr_db);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RADAR_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void CampaignConfig::validate() const {
    if (n_trials <= 0) throw ConfigError("campaign: n_trials must be positive");
    noise_variance(1.0, sc_snr_db);
    noise_variance(1.0, rc_snr_db);
    for (double v : sweep_values)
        if (!std::isfinite(v)) throw ConfigError("campaign: sweep values must be finite");
    if (sweep_axis != SweepAxis::none && sweep_values.empty())
        throw ConfigError("campaign: a sweep axis needs at least one sweep value");
    scenario.waveform_spec.validate();
    if (global) {
        if (global->nodes.size() < 2) throw ConfigError("campaign: global mode needs at least two nodes");
        global->target.validate();
        std::vector<NodeGeometry> geoms;
        for (const auto& n : global->nodes) {
            n.geometry.validate();
            geoms.push_back(n.geometry);
        }
        require_identifiable(geoms, global->target);
    } else {
        scenario.validate();
        if (std::norm(scenario.d) == 0.0 || std::norm(scenario.a) == 0.0)
            throw ConfigError("campaign: SNR definitions need non-zero a and d");
    }
}

std::vector<double> CampaignConfig::sweep_points() const {
    if (sweep_axis == SweepAxis::none) return {sc_snr_db};
    return sweep_values;
}

std::vector<TrialOutcome> run_trials(int n_trials, int threads, const std::function<TrialOutcome(int)>& fn) {
    std::vector<TrialOutcome> out(static_cast<std::size_t>(std::max(n_trials, 0)));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= n_trials) return;
            try {
                out[static_cast<std::size_t>(t)] = fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_trials;
                return;
            }
        }
    };
    const int n_workers = std::max(1, std::min(threads, n_trials));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

namespace {

// Sum after sorting so that the result does not depend on trial order.
double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

ErrorStats error_stats(const std::vector<TrialOutcome>& trials, int n_parameters) {
    ErrorStats s;
    const auto p = static_cast<std::size_t>(n_parameters);
    std::vector<std::vector<double>> sq(p), lin(p);
    for (const auto& t : trials) {
        if (!t.ok()) {
            ++s.n_outlier;
            continue;
        }
        ++s.n_ok;
        for (std::size_t i = 0; i < p; ++i) {
            sq[i].push_back(t.error.at(i) * t.error.at(i));
            lin[i].push_back(t.error.at(i));
        }
    }
    s.rmse.assign(p, std::nan(""));
    s.bias.assign(p, std::nan(""));
    if (s.n_ok == 0) return s;
    for (std::size_t i = 0; i < p; ++i) {
        s.rmse[i] = std::sqrt(sorted_sum(sq[i]) / s.n_ok);
        s.bias[i] = sorted_sum(lin[i]) / s.n_ok;
    }
    return s;
}

RMatrix empirical_covariance(const std::vector<TrialOutcome>& trials, int n_parameters) {
    RMatrix c = RMatrix::Zero(n_parameters, n_parameters);
    int n = 0;
    for (int i = 0; i < n_parameters; ++i) {
        for (int j = i; j < n_parameters; ++j) {
            std::vector<double> prod;
            for (const auto& t : trials)
                if (t.ok()) prod.push_back(t.error.at(static_cast<std::size_t>(i)) * t.error.at(static_cast<std::size_t>(j)));
            n = static_cast<int>(prod.size());
            c(i, j) = c(j, i) = n > 0 ? sorted_sum(prod) / n : std::nan("");
        }
    }
    return c;
}

namespace {

struct PointNoise {
    double sigma_e2;
    double sigma_n2;
};

PointNoise point_noise(const CampaignConfig& cfg, cplx a, cplx d, double sweep_db) {
    double sc = cfg.sc_snr_db;
    double rc = cfg.rc_snr_db;
    if (cfg.sweep_axis == SweepAxis::sc_snr_db) sc = sweep_db;
    if (cfg.sweep_axis == SweepAxis::rc_snr_db) rc = sweep_db;
    return {noise_variance(d, sc), noise_variance(a, rc)};
}

bool inside(double v, const std::vector<double>& axis) {
    return !axis.empty() && v >= axis.front() && v <= axis.back();
}

// Per-node scenarios of a global campaign at the true target state.
std::vector<NodeScenario> global_scenarios(const CampaignConfig& cfg) {
    std::vector<NodeScenario> out;
    for (const auto& n : cfg.global->nodes) {
        NodeScenario sc;
        sc.waveform_spec = cfg.scenario.waveform_spec;
        const Amplitudes amp = bistatic_amplitudes(n.geometry, cfg.global->target, n.link);
        sc.a = amp.a;
        sc.b = amp.b;
        sc.d = amp.d;
        sc.clutter_coeffs = n.clutter_coeffs;
        sc.target = delay_doppler(n.geometry, cfg.global->target);
        out.push_back(sc);
    }
    return out;
}

SweepPointReport single_point(const CampaignConfig& cfg, const std::shared_ptr<const IoWaveform>& w,
                              const SearchAxes& axes, int point, double sweep_db, int threads) {
    SweepPointReport r;
    r.sweep_db = sweep_db;
    const PointNoise noise = point_noise(cfg, cfg.scenario.a, cfg.scenario.d, sweep_db);
    r.sigma_e2 = noise.sigma_e2;
    r.sigma_n2 = noise.sigma_n2;
    NodeScenario sc = cfg.scenario;
    sc.sigma_e2 = noise.sigma_e2;
    sc.sigma_n2 = noise.sigma_n2;

    AnalysisSetup setup;
    setup.nodes.push_back({w, sc, std::nullopt});
    setup.variant = cfg.variant;
    r.theory = total_covariance(setup, sc.sigma_e2, sc.sigma_n2, false);

    const auto trials = run_trials(cfg.n_trials, threads, [&](int trial) {
        const std::uint64_t seed =
            RngStream::derive_seed(cfg.root_seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial)});
        const NodeProcessor proc(synthesize(*w, sc, seed), sc.n_taps());
        const EstimateResult est = estimate_node(proc, axes, cfg.estimate);
        TrialOutcome o;
        const DelayDoppler dd = est.delay_doppler();
        o.error = {dd.tau - sc.target.tau, dd.omega - sc.target.omega};
        o.converged = est.converged;
        o.in_range = inside(dd.tau, axes.tau) && inside(dd.omega, axes.omega);
        return o;
    });
    r.stats = error_stats(trials, 2);
    return r;
}

SweepPointReport global_point(const CampaignConfig& cfg, const std::shared_ptr<const IoWaveform>& w, int point,
                              double sweep_db, int threads) {
    const GlobalCampaign& g = *cfg.global;
    std::vector<NodeScenario> scenarios = global_scenarios(cfg);
    SweepPointReport r;
    r.sweep_db = sweep_db;
    // SNRs are defined on the first node; all nodes share the noise variances.
    const PointNoise noise = point_noise(cfg, scenarios.front().a, scenarios.front().d, sweep_db);
    r.sigma_e2 = noise.sigma_e2;
    r.sigma_n2 = noise.sigma_n2;
    AnalysisSetup setup;
    setup.target = g.target;
    setup.variant = cfg.variant;
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
        scenarios[k].sigma_e2 = noise.sigma_e2;
        scenarios[k].sigma_n2 = noise.sigma_n2;
        setup.nodes.push_back({w, scenarios[k], g.nodes[k].geometry});
    }
    r.theory = total_covariance(setup, noise.sigma_e2, noise.sigma_n2, false);

    const Eigen::Vector4d truth = g.target.as_vector();
    const auto trials = run_trials(cfg.n_trials, threads, [&](int trial) {
        std::vector<GlobalNode> nodes;
        for (std::size_t k = 0; k < scenarios.size(); ++k) {
            const std::uint64_t seed = RngStream::derive_seed(
                cfg.root_seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial), k});
            auto proc = std::make_shared<const NodeProcessor>(synthesize(*w, scenarios[k], seed), scenarios[k].n_taps());
            const double weight = scenarios[k].sigma_e2 > 0.0 ? 1.0 / scenarios[k].sigma_e2 : 1.0;
            nodes.push_back({g.nodes[k].geometry, std::move(proc), weight});
        }
        const EstimateResult est = estimate_global(nodes, g.grid, cfg.estimate);
        TrialOutcome o;
        o.converged = est.converged;
        o.in_range = true;
        for (int i = 0; i < 4; ++i) {
            const double v = est.point.at(static_cast<std::size_t>(i));
            o.error.push_back(v - truth(i));
            if (std::abs(v - g.grid.center(i)) > g.grid.half_width(i)) o.in_range = false;
        }
        return o;
    });
    r.stats = error_stats(trials, 4);
    return r;
}

}  // namespace

McReport run_campaign(const CampaignConfig& cfg) {
    cfg.validate();
    const auto w = std::make_shared<const IoWaveform>(generate_waveform(cfg.scenario.waveform_spec, cfg.waveform_seed));
    const int threads = resolve_threads(cfg.threads);
    const SearchAxes axes = make_axes(cfg.grid, cfg.scenario.waveform_spec);

    McReport report;
    report.sweep_axis = cfg.sweep_axis;
    report.n_trials = cfg.n_trials;
    AnalysisSetup names;
    if (cfg.global) names.target = cfg.global->target;
    report.parameters = names.parameter_names();

    const std::vector<double> points = cfg.sweep_points();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        SweepPointReport r = cfg.global ? global_point(cfg, w, static_cast<int>(i), points[i], threads)
                                        : single_point(cfg, w, axes, static_cast<int>(i), points[i], threads);
        for (Eigen::Index k = 0; k < r.theory.crb.rows(); ++k) {
            r.sqrt_crb.push_back(std::sqrt(r.theory.crb(k, k)));
            r.sqrt_total.push_back(std::sqrt(r.theory.total(k, k)));
        }
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.points.push_back(std::move(r));
    }
    return report;
}

std::vector<TheoryComparison> compare_theory(const McReport& report, const std::vector<CovarianceReport>& theory,
                                             double tolerance) {
    if (theory.size() != report.points.size())
        throw ConfigError("compare_theory: theory list does not match the sweep points");
    std::vector<TheoryComparison> out;
    for (std::size_t i = 0; i < theory.size(); ++i) {
        const auto& pt = report.points[i];
        const auto& th = theory[i];
        const auto p = static_cast<Eigen::Index>(pt.stats.rmse.size());
        if (th.crb.rows() != p) throw ConfigError("compare_theory: parameter count mismatch");
        TheoryComparison c;
        c.sweep_db = pt.sweep_db;
        for (Eigen::Index k = 0; k < p; ++k) {
            const double rmse = pt.stats.rmse[static_cast<std::size_t>(k)];
            c.ratio_crb.push_back(rmse / std::sqrt(th.crb(k, k)));
            const double rt = rmse / std::sqrt(th.total(k, k));
            c.ratio_total.push_back(rt);
            c.outside_band.push_back(!(std::abs(rt - 1.0) <= tolerance));
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<TheoryComparison> compare_theory(const McReport& report, double tolerance) {
    std::vector<CovarianceReport> theory;
    for (const auto& p : report.points) theory.push_back(p.theory);
    return compare_theory(report, theory, tolerance);
}

}  // namespace radar_lab
