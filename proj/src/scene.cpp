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

#include "radar_lab/scene.hpp"

#include <cmath>
#include <random>
#include <string>

#include "radar_lab/errors.hpp"

namespace radar_lab {

namespace {

constexpr double kMinDistance = 1e-9;

struct Legs {
    double r_io;  // IO -> target
    double r_rn;  // target -> RN
    Eigen::Vector2d u_io;  // unit vector IO -> target
    Eigen::Vector2d u_rn;  // unit vector RN -> target
};

Legs legs(const NodeGeometry& g, const TargetState& t) {
    g.validate();
    const Eigen::Vector2d from_io = t.position - g.io_position;
    const Eigen::Vector2d from_rn = t.position - g.rn_position;
    const double r_io = from_io.norm();
    const double r_rn = from_rn.norm();
    if (r_io < kMinDistance) throw GeometryError("target coincides with the illuminator");
    if (r_rn < kMinDistance) throw GeometryError("target coincides with the receiver");
    return {r_io, r_rn, from_io / r_io, from_rn / r_rn};
}

}  // namespace

void NodeGeometry::validate() const {
    if (baseline() < kMinDistance) throw GeometryError("illuminator and receiver positions coincide");
    if (!(carrier_frequency_hz > 0.0)) throw GeometryError("carrier frequency must be positive");
}

Eigen::Vector4d TargetState::as_vector() const {
    return {position.x(), position.y(), velocity.x(), velocity.y()};
}

TargetState TargetState::from_vector(const Eigen::Vector4d& theta) {
    return {Eigen::Vector2d(theta(0), theta(1)), Eigen::Vector2d(theta(2), theta(3))};
}

void TargetState::validate() const {
    if (!(velocity.norm() > 0.0)) throw GeometryError("target speed must be non-zero");
}

DelayDoppler delay_doppler(const NodeGeometry& g, const TargetState& t) {
    const Legs l = legs(g, t);
    const double excess = l.r_io + l.r_rn - g.baseline();
    const double range_rate = t.velocity.dot(l.u_io + l.u_rn);
    // Triangle inequality makes the excess path non-negative up to rounding.
    return {std::max(excess, 0.0) / kSpeedOfLight, -kTwoPi * g.carrier_frequency_hz / kSpeedOfLight * range_rate};
}

Eigen::Matrix<double, 2, 4> jacobian(const NodeGeometry& g, const TargetState& t) {
    const Legs l = legs(g, t);
    const double k = kTwoPi * g.carrier_frequency_hz / kSpeedOfLight;
    const Eigen::Vector2d u_sum = l.u_io + l.u_rn;
    const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
    // d(u)/d(p) = (I - u u^T) / r
    const Eigen::Vector2d drate_dp = (eye - l.u_io * l.u_io.transpose()) * t.velocity / l.r_io +
                                     (eye - l.u_rn * l.u_rn.transpose()) * t.velocity / l.r_rn;
    Eigen::Matrix<double, 2, 4> j = Eigen::Matrix<double, 2, 4>::Zero();
    j.block<1, 2>(0, 0) = u_sum.transpose() / kSpeedOfLight;
    j.block<1, 2>(1, 0) = -k * drate_dp.transpose();
    j.block<1, 2>(1, 2) = -k * u_sum.transpose();
    return j;
}

Amplitudes bistatic_amplitudes(const NodeGeometry& g, const TargetState& t, const LinkBudget& budget) {
    if (!(budget.transmit_power_w > 0.0)) throw ConfigError("transmit power must be positive");
    if (!(budget.rcs_m2 > 0.0)) throw ConfigError("rcs must be positive");
    if (budget.rc_gain < 0.0 || budget.sc_gain < 0.0 || budget.sc_direct_path_gain < 0.0)
        throw ConfigError("antenna gains must be non-negative");
    const Legs l = legs(g, t);
    const double lambda = g.wavelength();
    const double four_pi = 2.0 * kTwoPi;
    const double direct = lambda / (four_pi * g.baseline());
    const double echo = std::sqrt(budget.rcs_m2 / four_pi) * lambda / (four_pi * l.r_io * l.r_rn);

    std::mt19937_64 rng(budget.phase_seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    const double pa = phase(rng), pb = phase(rng), pd = phase(rng);
    const double amp = std::sqrt(budget.transmit_power_w);
    return {std::polar(amp * std::sqrt(budget.rc_gain) * direct, pa),
            std::polar(amp * std::sqrt(budget.sc_direct_path_gain) * direct, pb),
            std::polar(amp * std::sqrt(budget.sc_gain) * echo, pd)};
}

int stacked_jacobian_rank(std::span<const NodeGeometry> nodes, const TargetState& t) {
    if (nodes.empty()) return 0;
    Eigen::MatrixXd stacked(2 * static_cast<Eigen::Index>(nodes.size()), 4);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        Eigen::Matrix<double, 2, 4> j = jacobian(nodes[k], t);
        // Put delay rows in metres and Doppler rows in m/s so the rank
        // decision is not dominated by units.
        j.row(0) *= kSpeedOfLight;
        j.row(1) *= nodes[k].wavelength() / kTwoPi;
        stacked.middleRows(2 * static_cast<Eigen::Index>(k), 2) = j;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++rank;
    return rank;
}

void require_identifiable(std::span<const NodeGeometry> nodes, const TargetState& t) {
    const int rank = stacked_jacobian_rank(nodes, t);
    if (rank < 4)
        throw IdentifiabilityError("target state is under-determined: stacked Jacobian of " +
                                   std::to_string(nodes.size()) + " node(s) has rank " + std::to_string(rank) +
                                   " < 4");
}

}  // namespace radar_lab
