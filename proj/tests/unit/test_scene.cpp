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

#include "doctest.h"
#include "helpers.hpp"
#include "radar_lab/errors.hpp"
#include "radar_lab/scene.hpp"

using namespace radar_lab;
using namespace testing;

namespace {

NodeGeometry geometry(Eigen::Vector2d io, Eigen::Vector2d rn) {
    NodeGeometry g;
    g.io_position = io;
    g.rn_position = rn;
    return g;
}

TargetState state(double x, double y, double vx, double vy) {
    TargetState t;
    t.position = {x, y};
    t.velocity = {vx, vy};
    return t;
}

double bistatic_range(const NodeGeometry& g, const Eigen::Vector2d& p) {
    return (p - g.io_position).norm() + (p - g.rn_position).norm();
}

}  // namespace

TEST_CASE("target on the baseline has zero delay") {
    const NodeGeometry g = geometry({0, 0}, {1000, 0});
    CHECK(std::abs(delay_doppler(g, state(400, 0, 10, 3)).tau) < 1e-15);
}

TEST_CASE("velocity orthogonal to the summed line-of-sight gives zero Doppler") {
    const NodeGeometry g = geometry({0, 0}, {1000, 0});
    const TargetState t0 = state(300, 700, 1, 0);
    const Eigen::Vector2d u = (t0.position - g.io_position).normalized() + (t0.position - g.rn_position).normalized();
    const Eigen::Vector2d v = Eigen::Vector2d(-u.y(), u.x()).normalized() * 200.0;
    CHECK(std::abs(delay_doppler(g, state(300, 700, v.x(), v.y())).omega) < 1e-9);
}

TEST_CASE("Doppler matches the finite-difference range rate") {
    const NodeGeometry g = geometry({-2000, 500}, {3000, -100});
    const TargetState t = state(1200, 4100, -180, 170);
    const double h = 1e-6;
    const double rate =
        (bistatic_range(g, t.position + h * t.velocity) - bistatic_range(g, t.position - h * t.velocity)) / (2 * h);
    const double expect = -kTwoPi * g.carrier_frequency_hz / kSpeedOfLight * rate;
    CHECK(rel_err(delay_doppler(g, t).omega, expect) < 1e-6);
}

TEST_CASE("coincident points are geometry errors") {
    const NodeGeometry g = geometry({0, 0}, {1000, 0});
    CHECK_THROWS_AS(delay_doppler(g, state(0, 0, 1, 0)), GeometryError);
    CHECK_THROWS_AS(delay_doppler(g, state(1000, 0, 1, 0)), GeometryError);
    CHECK_THROWS_AS(geometry({5, 5}, {5, 5}).validate(), GeometryError);
    CHECK_THROWS_AS(state(1, 1, 0, 0).validate(), GeometryError);
}

TEST_CASE("jacobian versus central differences") {
    const NodeGeometry g = geometry({-2000, 500}, {3000, -100});
    const TargetState t = state(1200, 4100, -180, 170);
    const auto jac = jacobian(g, t);
    CHECK(jac(0, 2) == 0.0);
    CHECK(jac(0, 3) == 0.0);
    const Eigen::Vector4d theta = t.as_vector();
    for (int k = 0; k < 4; ++k) {
        Eigen::Vector4d e = Eigen::Vector4d::Zero();
        e(k) = 1e-3;
        const DelayDoppler p = delay_doppler(g, TargetState::from_vector(theta + e));
        const DelayDoppler m = delay_doppler(g, TargetState::from_vector(theta - e));
        const double dtau = (p.tau - m.tau) / 2e-3;
        const double domega = (p.omega - m.omega) / 2e-3;
        CAPTURE(k);
        if (k < 2) CHECK(rel_err(jac(0, k), dtau) < 1e-5);
        CHECK(rel_err(jac(1, k), domega) < 1e-5);
    }
}

TEST_CASE("mirror-symmetric scene gives antisymmetric delay gradient") {
    const NodeGeometry g = geometry({-1000, 0}, {1000, 0});
    const auto left = jacobian(g, state(-300, 800, 10, 10));
    const auto right = jacobian(g, state(300, 800, 10, 10));
    CHECK(std::abs(left(0, 0) + right(0, 0)) < 1e-10 * std::abs(left(0, 0)));
    CHECK(std::abs(left(0, 1) - right(0, 1)) < 1e-10 * std::abs(left(0, 1)));
}

TEST_CASE("delay is continuous at the millimetre scale") {
    const NodeGeometry g = geometry({0, 0}, {10000, 0});
    const TargetState t = state(4000, 3000, 100, 0);
    TargetState moved = t;
    moved.position += Eigen::Vector2d(1e-3, 0.0);
    CHECK(std::abs(delay_doppler(g, moved).tau - delay_doppler(g, t).tau) < 1e-11);
}

TEST_CASE("bistatic amplitude scaling laws") {
    const NodeGeometry g = geometry({0, 0}, {1000, 0});
    LinkBudget budget;
    budget.rcs_m2 = 2.0;
    // Target on the circle of radius 500 around the receiver; move the IO away along the same ray.
    const TargetState t = state(1000, 500, 10, 0);
    const double d1 = std::abs(bistatic_amplitudes(g, t, budget).d);
    const Eigen::Vector2d ray = t.position - g.io_position;
    const NodeGeometry far = geometry(t.position - 2.0 * ray, {1000, 0});
    CHECK(rel_err(std::abs(bistatic_amplitudes(far, t, budget).d), d1 / 2) < 1e-12);

    LinkBudget big = budget;
    big.rcs_m2 *= 4;
    CHECK(rel_err(std::abs(bistatic_amplitudes(g, t, big).d), 2 * d1) < 1e-12);

    const Amplitudes amp = bistatic_amplitudes(g, t, budget);
    const double sigma_e2 = std::norm(amp.d) / std::pow(10.0, 1.5);
    CHECK(std::abs(10 * std::log10(std::norm(amp.d) / sigma_e2) - 15.0) < 1e-12);
    CHECK(rel_err(std::abs(amp.a), std::sqrt(budget.transmit_power_w * budget.rc_gain) *
                                       g.wavelength() / (4 * kTwoPi / 2 * g.baseline())) < 1e-12);
}

TEST_CASE("stacked Jacobian rank and identifiability") {
    const TargetState t = state(500, 2500, 150, -200);
    std::vector<NodeGeometry> nodes{geometry({0, 0}, {3000, 0})};
    CHECK_THROWS_AS(require_identifiable(nodes, t), IdentifiabilityError);
    nodes.push_back(geometry({0, 0}, {-1500, 2000}));
    nodes.push_back(geometry({0, 0}, {2500, 4000}));
    CHECK(stacked_jacobian_rank(nodes, t) == 4);
    CHECK_NOTHROW(require_identifiable(nodes, t));
}
