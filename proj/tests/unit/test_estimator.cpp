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

#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "radar_lab/errors.hpp"
#include "radar_lab/estimator.hpp"
#include "radar_lab/refine.hpp"

using namespace radar_lab;
using namespace testing;

namespace {

struct Fixture {
    WaveformSpec spec = small_spec(256, 24);
    IoWaveform w = generate_waveform(spec, 21);
    NodeScenario sc = small_scenario(spec, 4, 6.3, 0.37);
    SearchAxes axes = make_axes(GridSpec{0.0, 12.0, 1.0, -2.0, 2.0, 1.0}, spec);
};

// Noise-free X_I basis from a snapshot's reference samples.
InterferenceBasis reference_basis(const ChannelSnapshot& s, int n_taps) {
    const CVector span = s.reference(-n_taps, s.n_samples() + n_taps);
    return clutter_basis({span.data(), static_cast<std::size_t>(span.size())}, s.n_samples(), n_taps);
}

}  // namespace

TEST_CASE("canceller annihilates its span, is idempotent and matches the textbook projector") {
    const WaveformSpec spec = small_spec(64, 8);
    const IoWaveform w = generate_waveform(spec, 2);
    NodeScenario sc = small_scenario(spec, 3);
    sc.sigma_n2 = 1e-3;
    const ChannelSnapshot snap = synthesize(w, sc, 5);
    const InterferenceBasis basis = reference_basis(snap, 3);
    const Canceller c = Canceller::build(basis);
    const CMatrix& q = c.orthonormal_basis();
    CHECK(max_abs(q.adjoint() * q - CMatrix::Identity(q.cols(), q.cols())) < 1e-12);
    for (Eigen::Index l = 0; l < basis.matrix().cols(); ++l) {
        const CVector col = basis.matrix().col(l);
        CHECK(c.apply(col).norm() < 1e-10 * col.norm());
    }
    const CVector y = random_vector(64, 8);
    CHECK(max_abs(c.apply(c.apply(y)) - c.apply(y)) < 1e-12);

    const CMatrix& x = basis.matrix();
    const CMatrix gram_inv = (x.adjoint() * x).completeOrthogonalDecomposition().pseudoInverse();
    const CMatrix textbook = CMatrix::Identity(64, 64) - x * gram_inv * x.adjoint();
    CHECK(max_abs(textbook * y - c.apply(y)) < 1e-10 * y.norm());

    const CMatrix dense = CMatrix::Identity(64, 64) - q * q.adjoint();
    CHECK(max_abs(dense * dense - dense) < 1e-12);
    CHECK(max_abs(dense - dense.adjoint()) < 1e-12);
}

TEST_CASE("criterion examples") {
    const WaveformSpec spec = small_spec(64, 8);
    const IoWaveform w = generate_waveform(spec, 2);
    const CVector s = w.samples(-3, 63);
    const Canceller c = Canceller::build(clutter_basis({s.data(), static_cast<std::size_t>(s.size())}, 64, 3));
    const CVector a = steering(w, 2.5 * spec.dt(), 0.8 * spec.doppler_bin()).values;
    const CVector pa = c.apply(a);
    CHECK(rel_err(criterion(pa, a, c), pa.squaredNorm()) < 1e-10);

    CVector orth = c.apply(random_vector(64, 3));
    orth -= pa * (pa.dot(orth) / pa.squaredNorm());
    CHECK(criterion(orth, a, c) < 1e-20 * orth.squaredNorm() * a.squaredNorm());

    const CVector in_span = s.tail(64);
    CHECK_THROWS_AS(criterion(random_vector(64, 4), in_span, c), DegenerateSteeringError);
}

TEST_CASE("noise-free criterion at truth equals |d|^2 ||Pi a||^2") {
    Fixture f;
    const ChannelSnapshot snap = synthesize(f.w, f.sc, 1);
    const NodeProcessor proc(snap, f.sc.n_taps());
    const InterferenceBasis basis = noise_free_basis(f.w, f.sc.n_taps());
    const CMatrix& q = basis.orthonormal();
    const CVector a = steering(f.w, f.sc.target.tau, f.sc.target.omega).values;
    const CVector pa = a - q * (q.adjoint() * a);
    CHECK(rel_err(proc.criterion(f.sc.target.tau, f.sc.target.omega), std::norm(f.sc.d) * pa.squaredNorm()) < 1e-8);
}

TEST_CASE("criterion is invariant to scaling the reference channel") {
    Fixture f;
    NodeScenario sc = f.sc;
    sc.sigma_e2 = 1e-2;
    sc.sigma_n2 = 1e-4;
    ChannelSnapshot snap = synthesize(f.w, sc, 3);
    const NodeProcessor p1(snap, 4);
    const cplx k{-2.5, 7.0};
    snap.x_ref *= k;
    snap.x_guard *= k;
    const NodeProcessor p2(snap, 4);
    for (double tau : {1.0, 4.5, 9.25})
        for (double w : {-1.3, 0.2, 0.9}) {
            const double t = tau * f.spec.dt(), o = w * f.spec.doppler_bin();
            CHECK(rel_err(p2.criterion(t, o), p1.criterion(t, o)) < 1e-10);
        }
}

TEST_CASE("ambiguity surface: noise-free peak, interference-only and bounds") {
    Fixture f;
    NodeScenario sc = f.sc;
    sc.target.tau = 6.0 * f.spec.dt();
    sc.target.omega = 1.0 * f.spec.doppler_bin();
    const NodeProcessor proc(synthesize(f.w, sc, 1), 4);
    const AmbiguitySurface s = ambiguity_surface(proc, f.axes);
    REQUIRE(s.has_peak());
    CHECK(std::abs(s.tau_axis[static_cast<std::size_t>(s.peak_tau)] - sc.target.tau) < 1e-15);
    CHECK(std::abs(s.omega_axis[static_cast<std::size_t>(s.peak_omega)] - sc.target.omega) < 1e-9);
    CHECK(s.values.minCoeff() >= 0.0);
    CHECK(s.values.maxCoeff() <= proc.cancelled_energy() + 1e-9);
    // zero Doppler on an integer tap inside the clutter span is masked
    const std::size_t zero_col = 2;
    CHECK(std::abs(s.omega_axis[zero_col]) < 1e-9);
    CHECK(s.masked(0, static_cast<Eigen::Index>(zero_col)));

    NodeScenario no_target = sc;
    no_target.d = 0.0;
    const NodeProcessor empty(synthesize(f.w, no_target, 1), 4);
    const AmbiguitySurface e = ambiguity_surface(empty, f.axes);
    for (Eigen::Index i = 0; i < e.values.rows(); ++i)
        for (Eigen::Index j = 0; j < e.values.cols(); ++j)
            if (!e.masked(i, j)) CHECK(e.values(i, j) < 1e-9);

    const auto peaks = threshold_peaks(s, 0.0);
    REQUIRE(!peaks.empty());
    CHECK(peaks.front().value == s.peak_value);
    CHECK(threshold_peaks(s, std::numeric_limits<double>::infinity()).empty());
    for (const auto& p : threshold_peaks(s, 0.5 * s.peak_value)) CHECK(p.value > 0.5 * s.peak_value);
    for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i - 1].value >= peaks[i].value);
}

TEST_CASE("cancellation completeness for y in span(X_I)") {
    Fixture f;
    NodeScenario sc = f.sc;
    sc.d = 0.0;
    sc.sigma_n2 = 1e-3;
    ChannelSnapshot snap = synthesize(f.w, sc, 4);
    const CVector span = snap.reference(-4, 256 + 4);
    const InterferenceBasis xb = clutter_basis({span.data(), static_cast<std::size_t>(span.size())}, 256, 4);
    snap.y_surv = xb.matrix() * random_vector(5, 6);
    const NodeProcessor proc(snap, 4);
    const double y2 = snap.y_surv.squaredNorm();
    for (double tau : f.axes.tau)
        for (double omega : f.axes.omega) {
            const double p = proc.criterion_or_masked(tau, omega);
            if (p >= 0.0) CHECK(p < 1e-9 * y2 * proc.reference_delayed(tau).squaredNorm());
        }
}

TEST_CASE("refine: quadratic bowl and failure modes") {
    const double t0 = 3.3, w0 = -0.7, s = 5.0;
    auto bowl = [&](std::span<const double> p) { return -((p[0] - t0) * (p[0] - t0) + (p[1] - w0) * (p[1] - w0) * s * s); };
    const std::vector<double> start{t0 + 1.0, w0 - 1.0}, scale{1.0, 1.0};
    const EstimateResult r = refine(bowl, start, scale);
    CHECK(r.converged);
    CHECK(std::abs(r.point[0] - t0) < 1e-6);
    CHECK(std::abs(r.point[1] - w0) < 1e-6);

    RefineOptions few;
    few.max_iterations = 3;
    CHECK_FALSE(refine(bowl, start, scale, few).converged);

    auto broken = [](std::span<const double> p) { return p[0] > 0.5 ? std::nan("") : -p[0] * p[0]; };
    CHECK_THROWS_AS(refine(broken, std::vector<double>{0.0, 0.0}, scale), NonFiniteObjectiveError);
}

TEST_CASE("noise-free end-to-end estimate is exact") {
    Fixture f;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const IoWaveform w = generate_waveform(f.spec, seed);
        const NodeProcessor proc(synthesize(w, f.sc, 1), 4);
        const EstimateResult r = estimate_node(proc, f.axes);
        CHECK(r.converged);
        CHECK(std::abs(r.point[0] - f.sc.target.tau) < 1e-8 * f.spec.dt());
        CHECK(std::abs(r.point[1] - f.sc.target.omega) < 1e-8 * f.spec.doppler_bin());
    }
}

TEST_CASE("refinement improves on the grid estimate") {
    Fixture f;
    NodeScenario sc = f.sc;
    sc.sigma_e2 = std::norm(sc.d) / 10.0;
    sc.sigma_n2 = std::norm(sc.a) * 1e-6;
    NodeEstimateOptions grid_only;
    grid_only.refine = false;
    double se_grid = 0.0, se_refined = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const NodeProcessor proc(synthesize(f.w, sc, 100 + t), 4);
        const auto g = estimate_node(proc, f.axes, grid_only);
        const auto r = estimate_node(proc, f.axes);
        se_grid += std::pow((g.point[0] - sc.target.tau) / f.spec.dt(), 2);
        se_refined += std::pow((r.point[0] - sc.target.tau) / f.spec.dt(), 2);
    }
    CHECK(se_refined <= se_grid);
}

namespace {

struct GlobalScene {
    TargetState truth;
    std::vector<NodeGeometry> geoms;
    std::vector<NodeScenario> scenarios;
    std::vector<GlobalNode> nodes;
    WaveformSpec spec = small_spec(256, 24);
    IoWaveform w = generate_waveform(spec, 4);

    GlobalScene() {
        truth.position = {5000.0, 0.0};
        truth.velocity = {150.0, 200.0};
        for (Eigen::Vector2d rn : {Eigen::Vector2d(5100, 50), Eigen::Vector2d(5050, -120), Eigen::Vector2d(4900, 150)}) {
            NodeGeometry g;
            g.io_position = {0.0, 0.0};
            g.rn_position = rn;
            g.carrier_frequency_hz = 50e9;
            geoms.push_back(g);
            NodeScenario sc = small_scenario(spec, 4);
            sc.target = delay_doppler(g, truth);
            scenarios.push_back(sc);
            nodes.push_back({g, std::make_shared<const NodeProcessor>(synthesize(w, sc, 1), 4), 1.0});
        }
    }
};

}  // namespace

TEST_CASE("global likelihood: K=1 equals the node criterion; K=3 noise-free sums |d|^2 ||Pi a||^2") {
    GlobalScene g;
    const DelayDoppler dd = delay_doppler(g.geoms[0], g.truth);
    const std::span<const GlobalNode> one(g.nodes.data(), 1);
    CHECK(rel_err(global_likelihood(g.truth, one).value, g.nodes[0].processor->criterion(dd.tau, dd.omega)) < 1e-14);

    double expect = 0.0;
    const InterferenceBasis basis = noise_free_basis(g.w, 4);
    const CMatrix& q = basis.orthonormal();
    for (const auto& sc : g.scenarios) {
        const CVector a = steering(g.w, sc.target.tau, sc.target.omega).values;
        expect += std::norm(sc.d) * (a - q * (q.adjoint() * a)).squaredNorm();
    }
    const GlobalValue v = global_likelihood(g.truth, g.nodes);
    CHECK(rel_err(v.value, expect) < 1e-8);
    for (bool m : v.missing) CHECK_FALSE(m);

    TargetState far = g.truth;
    far.position += Eigen::Vector2d(0.0, 3000.0);
    const GlobalValue outside = global_likelihood(far, g.nodes);
    CHECK(outside.missing[0]);
}

TEST_CASE("global estimate: noise-free recovery and K=1 refusal") {
    GlobalScene g;
    ThetaGrid grid;
    grid.center = g.truth.as_vector() + Eigen::Vector4d(3.0, -2.0, 4.0, -3.0);
    grid.half_width = Eigen::Vector4d(12.0, 12.0, 20.0, 20.0);
    const EstimateResult r = estimate_global(g.nodes, grid);
    const Eigen::Vector4d err = Eigen::Vector4d(r.point[0], r.point[1], r.point[2], r.point[3]) - g.truth.as_vector();
    CHECK(err.cwiseAbs().maxCoeff() < 1e-6);

    const std::span<const GlobalNode> one(g.nodes.data(), 1);
    CHECK_THROWS_AS(estimate_global(one, grid), IdentifiabilityError);
}
