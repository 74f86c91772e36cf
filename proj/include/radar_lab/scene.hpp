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
#include <span>

#include <Eigen/Dense>

#include "radar_lab/types.hpp"

namespace radar_lab {

// One illuminator / receiver pair in the 2D plane.
struct NodeGeometry {
    Eigen::Vector2d io_position = Eigen::Vector2d::Zero();
    Eigen::Vector2d rn_position = Eigen::Vector2d::Zero();
    double carrier_frequency_hz = 600e6;

    double baseline() const { return (io_position - rn_position).norm(); }
    double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
    void validate() const;
};

struct TargetState {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();

    // (x, y, vx, vy)
    Eigen::Vector4d as_vector() const;
    static TargetState from_vector(const Eigen::Vector4d& theta);
    // The target model assumes constant, non-zero speed.
    void validate() const;
};

struct DelayDoppler {
    double tau = 0.0;    // seconds after the direct-path arrival
    double omega = 0.0;  // rad/s
};

struct LinkBudget {
    double transmit_power_w = 1.0;
    double rcs_m2 = 1.0;
    double rc_gain = 1.0;              // reference antenna towards the IO
    double sc_gain = 1.0;              // surveillance antenna towards the target
    double sc_direct_path_gain = 1.0;  // surveillance antenna towards the IO
    std::uint64_t phase_seed = 0;
};

struct Amplitudes {
    cplx a;  // direct path into the reference channel
    cplx b;  // direct path into the surveillance channel
    cplx d;  // target echo
};

DelayDoppler delay_doppler(const NodeGeometry& g, const TargetState& t);

// Rows d(tau, omega), columns d(x, y, vx, vy).
Eigen::Matrix<double, 2, 4> jacobian(const NodeGeometry& g, const TargetState& t);

Amplitudes bistatic_amplitudes(const NodeGeometry& g, const TargetState& t, const LinkBudget& budget);

// Rank of the stacked 2K x 4 Jacobian; 4 means the (tau, omega) pairs of all
// nodes determine the target state locally.
int stacked_jacobian_rank(std::span<const NodeGeometry> nodes, const TargetState& t);

// Throws IdentifiabilityError unless the stacked Jacobian has rank 4.
void require_identifiable(std::span<const NodeGeometry> nodes, const TargetState& t);

}  // namespace radar_lab
