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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "radar_lab/refine.hpp"
#include "radar_lab/scene.hpp"
#include "radar_lab/signal_core.hpp"
#include "radar_lab/synth.hpp"

namespace radar_lab {

enum class CancellerSource { noise_free, reference_channel };

// Orthogonal projection onto the complement of span(X_I), applied as
// y -> y - Q (Q^H y) with Q the thin orthonormal factor of X_I.
class Canceller {
public:
    static Canceller build(const InterferenceBasis& basis, CancellerSource source = CancellerSource::reference_channel);

    const CMatrix& orthonormal_basis() const { return q_; }
    CancellerSource source() const { return source_; }
    int n_samples() const { return static_cast<int>(q_.rows()); }

    CVector coefficients(const CVector& v) const;  // Q^H v
    CVector apply(const CVector& v) const;          // (I - Q Q^H) v
    // ||(I - Q Q^H) v||^2 evaluated as ||v||^2 - ||Q^H v||^2
    double complement_norm2(const CVector& v) const;

private:
    CMatrix q_;
    CancellerSource source_ = CancellerSource::reference_channel;
};

// Relative threshold below which a^H Pi a is treated as zero.
inline constexpr double kDegenerateSteering = 1e-12;

// |a^H Pi y|^2 / (a^H Pi a). Throws DegenerateSteeringError when a lies in
// the cancelled span.
double criterion(const CVector& y, const CVector& a_hat, const Canceller& canceller);

struct GridSpec {
    double tau_min_samples = 0.0;
    double tau_max_samples = -1.0;  // negative: use M
    double tau_step_samples = 1.0;
    double omega_min_bins = -2.0;
    double omega_max_bins = 2.0;
    double omega_step_bins = 0.5;
};

struct SearchAxes {
    std::vector<double> tau;    // seconds
    std::vector<double> omega;  // rad/s
    double tau_step = 0.0;
    double omega_step = 0.0;
};

SearchAxes make_axes(const GridSpec& grid, const WaveformSpec& spec);

// Per-snapshot state shared by every criterion evaluation: the reference
// interpolant, the canceller built from X_I and the cancelled surveillance
// vector. Immutable after construction.
class NodeProcessor {
public:
    NodeProcessor(ChannelSnapshot snapshot, int n_taps);

    const ChannelSnapshot& snapshot() const { return snapshot_; }
    const Canceller& canceller() const { return canceller_; }
    const CVector& cancelled() const { return cancelled_; }
    double cancelled_energy() const { return cancelled_energy_; }
    int n_samples() const { return snapshot_.n_samples(); }
    int n_taps() const { return n_taps_; }
    double dt() const { return snapshot_.dt; }
    double max_tau() const { return snapshot_.max_delay_samples() * snapshot_.dt; }

    // x(t_n - tau), n = 0..N-1; integer-sample delays read the record directly.
    CVector reference_delayed(double tau) const;
    CVector steering_hat(double tau, double omega) const;

    double criterion(double tau, double omega) const;
    // Criterion, or nullopt-like -1 when the cell is degenerate.
    double criterion_or_masked(double tau, double omega) const;
    // ||Pi y - P_hat Pi y||^2 = ||Pi y||^2 - criterion, evaluated from the
    // residual vector so that it keeps relative precision near a perfect fit.
    double residual(double tau, double omega) const;

private:
    ChannelSnapshot snapshot_;
    int n_taps_;
    PeriodicSeries reference_;
    Canceller canceller_;
    CVector cancelled_;
    double cancelled_energy_ = 0.0;
};

struct AmbiguitySurface {
    std::vector<double> tau_axis;
    std::vector<double> omega_axis;
    RMatrix values;  // rows follow tau_axis, columns omega_axis
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> masked;
    Eigen::Index peak_tau = -1;
    Eigen::Index peak_omega = -1;
    double peak_value = 0.0;

    bool has_peak() const { return peak_tau >= 0; }
};

AmbiguitySurface ambiguity_surface(const NodeProcessor& node, const SearchAxes& axes);
AmbiguitySurface ambiguity_surface(const ChannelSnapshot& snapshot, int n_taps, const SearchAxes& axes);

struct Peak {
    double tau;
    double omega;
    double value;
};

// Unmasked local maxima (8-neighbourhood) strictly above threshold, largest first.
std::vector<Peak> threshold_peaks(const AmbiguitySurface& surface, double threshold);

struct NodeEstimateOptions {
    bool refine = true;
    RefineOptions refine_options;
    // Second simplex pass restarted at the first result with the scale
    // reduced by this factor; zero disables it.
    double polish_factor = 1e-3;
};

EstimateResult estimate_node(const NodeProcessor& node, const SearchAxes& axes, const NodeEstimateOptions& options = {});

// ---------------------------------------------------------------------------
// Multi-node combination

struct GlobalNode {
    NodeGeometry geometry;
    std::shared_ptr<const NodeProcessor> processor;
    double weight = 1.0;
};

struct GlobalValue {
    double value = 0.0;
    std::vector<bool> missing;  // node contributed zero (degenerate or outside its search range)
};

GlobalValue global_likelihood(const TargetState& theta, std::span<const GlobalNode> nodes);

struct ThetaGrid {
    Eigen::Vector4d center = Eigen::Vector4d::Zero();
    Eigen::Vector4d half_width = Eigen::Vector4d::Ones();
    std::array<int, 4> points{5, 5, 5, 5};

    Eigen::Vector4d step() const;
};

EstimateResult estimate_global(std::span<const GlobalNode> nodes, const ThetaGrid& grid,
                               const NodeEstimateOptions& options = {});

}  // namespace radar_lab
