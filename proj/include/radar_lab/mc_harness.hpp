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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radar_lab/analysis.hpp"
#include "radar_lab/estimator.hpp"
#include "radar_lab/scene.hpp"
#include "radar_lab/synth.hpp"

namespace radar_lab {

enum class SweepAxis { none, sc_snr_db, rc_snr_db };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

// One receiver of a multi-node (K > 1) campaign. Amplitudes and the true
// (tau, omega) follow from the geometry and link budget.
struct CampaignNode {
    NodeGeometry geometry;
    LinkBudget link;
    std::vector<cplx> clutter_coeffs;
};

struct GlobalCampaign {
    TargetState target;
    std::vector<CampaignNode> nodes;
    ThetaGrid grid;  // centered on the true state unless overridden
};

struct CampaignConfig {
    // Amplitudes, clutter, true (tau, omega) and waveform spec for a single
    // node; for K > 1 only waveform_spec and target-independent fields are used.
    NodeScenario scenario;
    std::uint64_t waveform_seed = 1;
    double sc_snr_db = 15.0;  // |d|^2 / sigma_e^2
    double rc_snr_db = 75.0;  // |a|^2 / sigma_n^2
    int n_trials = 300;
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<double> sweep_values;
    std::uint64_t root_seed = 1;
    GridSpec grid;
    NodeEstimateOptions estimate;
    ErrorMapVariant variant = ErrorMapVariant::verbatim;
    int threads = 0;  // 0: resolve from environment / hardware
    std::optional<GlobalCampaign> global;

    void validate() const;
    std::vector<double> sweep_points() const;  // {sc_snr_db} when sweep_axis is none
};

// sigma^2 such that 10 log10(|amp|^2 / sigma^2) = snr_db.
double noise_variance(cplx amplitude, double snr_db);

// Threads to use: explicit request if positive, else RADAR_LAB_THREADS, else hardware.
int resolve_threads(int requested);

struct TrialOutcome {
    std::vector<double> error;  // estimate - truth per parameter
    bool converged = false;
    bool in_range = false;
    bool ok() const { return converged && in_range; }
};

// Runs fn(trial) for trial = 0..n-1 on a worker pool; results are indexed by trial.
std::vector<TrialOutcome> run_trials(int n_trials, int threads, const std::function<TrialOutcome(int)>& fn);

struct ErrorStats {
    std::vector<double> rmse;
    std::vector<double> bias;
    int n_ok = 0;
    int n_outlier = 0;
};

// RMSE and bias over the accepted trials; invariant to trial order.
ErrorStats error_stats(const std::vector<TrialOutcome>& trials, int n_parameters);
// Sample covariance about the true value (zero error) over accepted trials.
RMatrix empirical_covariance(const std::vector<TrialOutcome>& trials, int n_parameters);

struct SweepPointReport {
    double sweep_db = 0.0;
    double sigma_e2 = 0.0;
    double sigma_n2 = 0.0;
    ErrorStats stats;
    std::vector<double> sqrt_crb;
    std::vector<double> sqrt_total;
    CovarianceReport theory;
    double wall_seconds = 0.0;
};

struct McReport {
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<std::string> parameters;
    int n_trials = 0;
    std::vector<SweepPointReport> points;
};

McReport run_campaign(const CampaignConfig& cfg);

struct TheoryComparison {
    double sweep_db = 0.0;
    std::vector<double> ratio_crb;    // empirical RMSE / sqrt(CRB)
    std::vector<double> ratio_total;  // empirical RMSE / sqrt(total)
    std::vector<bool> outside_band;   // ratio_total outside [1 - tol, 1 + tol]
};

std::vector<TheoryComparison> compare_theory(const McReport& report, const std::vector<CovarianceReport>& theory,
                                             double tolerance);
// Convenience: compare against the theory stored in the report itself.
std::vector<TheoryComparison> compare_theory(const McReport& report, double tolerance);

}  // namespace radar_lab
