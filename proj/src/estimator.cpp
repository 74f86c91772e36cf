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

#include "radar_lab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radar_lab/errors.hpp"
#include "radar_lab/kernels.hpp"

namespace radar_lab {

namespace {

std::span<const cplx> view(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::span<const cplx> column(const CMatrix& m, Eigen::Index j) {
    return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

std::vector<double> linear_axis(double lo, double hi, double step, double unit) {
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (hi < lo) throw ConfigError("grid upper bound below lower bound");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> axis(count);
    for (std::size_t i = 0; i < count; ++i) axis[i] = (lo + static_cast<double>(i) * step) * unit;
    return axis;
}

}  // namespace

SearchAxes make_axes(const GridSpec& grid, const WaveformSpec& spec) {
    const double tau_max = grid.tau_max_samples < 0.0 ? spec.max_delay_samples : grid.tau_max_samples;
    if (grid.tau_min_samples < 0.0 || tau_max > spec.max_delay_samples)
        throw ConfigError("delay grid must lie within [0, M] samples");
    SearchAxes axes;
    axes.tau = linear_axis(grid.tau_min_samples, tau_max, grid.tau_step_samples, spec.dt());
    axes.omega = linear_axis(grid.omega_min_bins, grid.omega_max_bins, grid.omega_step_bins, spec.doppler_bin());
    axes.tau_step = grid.tau_step_samples * spec.dt();
    axes.omega_step = grid.omega_step_bins * spec.doppler_bin();
    return axes;
}

// ---------------------------------------------------------------------------
// NodeProcessor

NodeProcessor::NodeProcessor(ChannelSnapshot snapshot, int n_taps) : snapshot_(std::move(snapshot)), n_taps_(n_taps) {
    const int n = snapshot_.n_samples();
    const int m = snapshot_.max_delay_samples();
    if (n <= 0 || m < 0) throw ConfigError("snapshot: reference record shorter than surveillance record");
    if (n_taps_ < 0 || n_taps_ > m) throw ConfigError("snapshot: clutter length must lie in [0, M]");
    const int g = static_cast<int>(snapshot_.x_guard.size());
    CVector record(g + m + n);
    record << snapshot_.x_guard, snapshot_.x_ref;
    reference_ = PeriodicSeries::from_samples(snapshot_.dt, -m - g, {record.data(), static_cast<std::size_t>(record.size())});

    const CVector span = snapshot_.reference(-n_taps_, n + n_taps_);
    canceller_ = Canceller::build(clutter_basis({span.data(), static_cast<std::size_t>(span.size())}, n, n_taps_));
    cancelled_ = canceller_.apply(snapshot_.y_surv);
    cancelled_energy_ = kernels::norm2(view(cancelled_));
}

CVector NodeProcessor::reference_delayed(double tau) const {
    const double u = tau / snapshot_.dt;
    const double k = std::round(u);
    const int n = n_samples();
    const int g = static_cast<int>(snapshot_.x_guard.size());
    if (std::abs(u - k) < 1e-11 && k >= 0 && k <= snapshot_.max_delay_samples() + g)
        return snapshot_.reference(-static_cast<int>(k), n);
    return reference_.delayed(tau, 0, n);
}

CVector NodeProcessor::steering_hat(double tau, double omega) const {
    return reference_delayed(tau).cwiseProduct(doppler_vector(omega, n_samples(), snapshot_.dt));
}

double NodeProcessor::criterion(double tau, double omega) const {
    return radar_lab::criterion(cancelled_, steering_hat(tau, omega), canceller_);
}

double NodeProcessor::criterion_or_masked(double tau, double omega) const {
    try {
        return criterion(tau, omega);
    } catch (const DegenerateSteeringError&) {
        return -1.0;
    }
}

double NodeProcessor::residual(double tau, double omega) const {
    const CVector a_hat = steering_hat(tau, omega);
    const CVector u = canceller_.apply(a_hat);
    const double den = kernels::norm2(view(u));
    if (!(den > kDegenerateSteering * kernels::norm2(view(a_hat)))) return cancelled_energy_;
    const cplx coef = kernels::dotc(view(u), view(cancelled_)) / den;
    CVector rest = cancelled_;
    kernels::axpy(-coef, view(u), {rest.data(), static_cast<std::size_t>(rest.size())});
    return kernels::norm2(view(rest));
}

// ---------------------------------------------------------------------------
// Surface and peaks

AmbiguitySurface ambiguity_surface(const NodeProcessor& node, const SearchAxes& axes) {
    const int n = node.n_samples();
    const auto rows = static_cast<Eigen::Index>(axes.tau.size());
    const auto cols = static_cast<Eigen::Index>(axes.omega.size());
    AmbiguitySurface s;
    s.tau_axis = axes.tau;
    s.omega_axis = axes.omega;
    s.values = RMatrix::Zero(rows, cols);
    s.masked.setConstant(rows, cols, false);

    std::vector<CVector> dopplers, dopplers_conj;
    for (double omega : axes.omega) {
        dopplers.push_back(doppler_vector(omega, n, node.dt()));
        dopplers_conj.push_back(dopplers.back().conjugate());
    }
    const CMatrix& q = node.canceller().orthonormal_basis();
    const CVector& r = node.cancelled();

    for (Eigen::Index i = 0; i < rows; ++i) {
        const CVector x = node.reference_delayed(axes.tau[static_cast<std::size_t>(i)]);
        const double x_energy = kernels::norm2(view(x));
        for (Eigen::Index j = 0; j < cols; ++j) {
            const CVector& v = dopplers[static_cast<std::size_t>(j)];
            const cplx num = kernels::dotc3(view(x), view(dopplers_conj[static_cast<std::size_t>(j)]), view(r));
            double in_span = 0.0;
            for (Eigen::Index l = 0; l < q.cols(); ++l) in_span += std::norm(kernels::dotc3(column(q, l), view(x), view(v)));
            const double den = x_energy - in_span;
            if (!(den > kDegenerateSteering * x_energy)) {
                s.masked(i, j) = true;
                continue;
            }
            const double value = std::norm(num) / den;
            s.values(i, j) = value;
            if (!s.has_peak() || value > s.peak_value) {
                s.peak_tau = i;
                s.peak_omega = j;
                s.peak_value = value;
            }
        }
    }
    return s;
}

AmbiguitySurface ambiguity_surface(const ChannelSnapshot& snapshot, int n_taps, const SearchAxes& axes) {
    return ambiguity_surface(NodeProcessor(snapshot, n_taps), axes);
}

std::vector<Peak> threshold_peaks(const AmbiguitySurface& surface, double threshold) {
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
    std::vector<Peak> peaks;
    const Eigen::Index rows = surface.values.rows(), cols = surface.values.cols();
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (surface.masked(i, j)) continue;
            const double v = surface.values(i, j);
            if (!(v > threshold)) continue;
            bool is_max = true;
            for (Eigen::Index di = -1; di <= 1 && is_max; ++di) {
                for (Eigen::Index dj = -1; dj <= 1; ++dj) {
                    const Eigen::Index a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= rows || b >= cols || surface.masked(a, b)) continue;
                    if (surface.values(a, b) > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max)
                peaks.push_back({surface.tau_axis[static_cast<std::size_t>(i)],
                                 surface.omega_axis[static_cast<std::size_t>(j)], v});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
    return peaks;
}

// ---------------------------------------------------------------------------
// Single-node estimate

namespace {

EstimateResult two_stage_refine(const Objective& objective, std::vector<double> start, std::vector<double> scale,
                                const NodeEstimateOptions& options) {
    EstimateResult first = refine(objective, start, scale, options.refine_options);
    if (!(options.polish_factor > 0.0)) return first;
    for (double& s : scale) s *= options.polish_factor;
    EstimateResult second = refine(objective, first.point, scale, options.refine_options);
    second.iterations += first.iterations;
    second.evaluations += first.evaluations;
    second.converged = second.converged && first.converged;
    return second;
}

}  // namespace

EstimateResult estimate_node(const NodeProcessor& node, const SearchAxes& axes, const NodeEstimateOptions& options) {
    const AmbiguitySurface surface = ambiguity_surface(node, axes);
    if (!surface.has_peak()) throw DegenerateSteeringError("estimate_node: every grid cell is masked");
    std::vector<double> start{surface.tau_axis[static_cast<std::size_t>(surface.peak_tau)],
                              surface.omega_axis[static_cast<std::size_t>(surface.peak_omega)]};
    if (!options.refine) {
        EstimateResult r;
        r.point = start;
        r.criterion_value = surface.peak_value;
        r.converged = true;
        return r;
    }
    const double tau_scale = axes.tau_step > 0.0 ? axes.tau_step : node.dt();
    const double omega_scale = axes.omega_step > 0.0 ? axes.omega_step : kTwoPi / (node.n_samples() * node.dt());
    auto objective = [&node](std::span<const double> p) { return -node.residual(p[0], p[1]); };
    EstimateResult r = two_stage_refine(objective, start, {tau_scale, omega_scale}, options);
    r.criterion_value = node.cancelled_energy() + r.criterion_value;
    return r;
}

// ---------------------------------------------------------------------------
// Global combination

namespace {

// Per-node delay/Doppler at theta, or nothing when the node cannot contribute.
bool mapped_point(const GlobalNode& node, const TargetState& theta, DelayDoppler& out) {
    try {
        out = delay_doppler(node.geometry, theta);
    } catch (const GeometryError&) {
        return false;
    }
    return out.tau >= 0.0 && out.tau <= node.processor->max_tau();
}

}  // namespace

GlobalValue global_likelihood(const TargetState& theta, std::span<const GlobalNode> nodes) {
    if (nodes.empty()) throw ConfigError("global_likelihood needs at least one node");
    GlobalValue out;
    out.missing.assign(nodes.size(), false);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        DelayDoppler dd;
        double p = -1.0;
        if (mapped_point(nodes[k], theta, dd)) p = nodes[k].processor->criterion_or_masked(dd.tau, dd.omega);
        if (p < 0.0) {
            out.missing[k] = true;
            continue;
        }
        out.value += nodes[k].weight * p;
    }
    return out;
}

Eigen::Vector4d ThetaGrid::step() const {
    Eigen::Vector4d s;
    for (int i = 0; i < 4; ++i) s(i) = points[i] > 1 ? 2.0 * half_width(i) / (points[i] - 1) : half_width(i);
    return s;
}

EstimateResult estimate_global(std::span<const GlobalNode> nodes, const ThetaGrid& grid,
                               const NodeEstimateOptions& options) {
    if (nodes.empty()) throw ConfigError("estimate_global needs at least one node");
    std::vector<NodeGeometry> geometries;
    for (const auto& n : nodes) geometries.push_back(n.geometry);
    require_identifiable(geometries, TargetState::from_vector(grid.center));
    for (int p : grid.points)
        if (p < 1) throw ConfigError("theta grid needs at least one point per axis");

    const Eigen::Vector4d step = grid.step();
    Eigen::Vector4d best = grid.center;
    double best_value = -std::numeric_limits<double>::infinity();
    std::array<int, 4> idx{0, 0, 0, 0};
    while (true) {
        Eigen::Vector4d theta;
        for (int i = 0; i < 4; ++i)
            theta(i) = grid.points[i] > 1 ? grid.center(i) - grid.half_width(i) + idx[i] * step(i) : grid.center(i);
        const double v = global_likelihood(TargetState::from_vector(theta), nodes).value;
        if (v > best_value) {
            best_value = v;
            best = theta;
        }
        int axis = 0;
        while (axis < 4 && ++idx[axis] == grid.points[axis]) idx[axis++] = 0;
        if (axis == 4) break;
    }

    std::vector<double> start(best.data(), best.data() + 4);
    if (!options.refine) {
        EstimateResult r;
        r.point = start;
        r.criterion_value = best_value;
        r.converged = true;
        return r;
    }
    auto objective = [nodes](std::span<const double> p) {
        const TargetState theta = TargetState::from_vector(Eigen::Vector4d(p[0], p[1], p[2], p[3]));
        double total = 0.0;
        for (const auto& node : nodes) {
            DelayDoppler dd;
            const double miss = node.processor->cancelled_energy();
            total -= node.weight * (mapped_point(node, theta, dd) ? node.processor->residual(dd.tau, dd.omega) : miss);
        }
        return total;
    };
    EstimateResult r = two_stage_refine(objective, start, {step(0), step(1), step(2), step(3)}, options);
    r.criterion_value = global_likelihood(r.target_state(), nodes).value;
    return r;
}

}  // namespace radar_lab
