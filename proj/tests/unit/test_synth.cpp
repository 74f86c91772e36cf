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
#include "radar_lab/synth.hpp"

using namespace radar_lab;
using namespace testing;

TEST_CASE("complex_wgn statistics") {
    RngStream zero(1, {1});
    CHECK(complex_wgn(16, 0.0, zero).norm() == 0.0);

    RngStream s(7, {1});
    const CVector v = complex_wgn(1000000, 2.0, s);
    CHECK(std::abs(v.squaredNorm() / v.size() - 2.0) < 0.01);
    double re = 0.0, im = 0.0;
    for (auto x : v) {
        re += x.real() * x.real();
        im += x.imag() * x.imag();
    }
    CHECK(std::abs(re / v.size() - 1.0) < 0.01);
    CHECK(std::abs(im / v.size() - 1.0) < 0.01);

    RngStream s2(7, {2});
    const CVector u = complex_wgn(1000000, 2.0, s2);
    CHECK(std::abs(v.dot(u)) / v.size() < 0.01 * 2.0);
}

TEST_CASE("derived seeds depend on the whole path") {
    CHECK(RngStream::derive_seed(1, {0, 1}) != RngStream::derive_seed(1, {1, 0}));
    CHECK(RngStream::derive_seed(1, {0, 1}) == RngStream::derive_seed(1, {0, 1}));
    CHECK(RngStream::derive_seed(1, {}) != RngStream::derive_seed(2, {}));
}

TEST_CASE("synthesize: target-only and interference-only scenarios") {
    const WaveformSpec spec = small_spec(256, 16);
    const IoWaveform w = generate_waveform(spec, 3);

    NodeScenario target_only = small_scenario(spec, 0);
    target_only.b = 0.0;
    const ChannelSnapshot t = synthesize(w, target_only, 9);
    const CVector expect = target_only.d * steering(w, target_only.target.tau, target_only.target.omega).values;
    CHECK(max_abs(t.y_surv - expect) < 1e-13);
    CHECK(t.x_ref.size() == 256 + 16);
    CHECK(t.y_surv.size() == 256);
    CHECK(rel_err(t.x_ref, CVector(target_only.a * w.samples(-16, 255))) < 1e-13);

    NodeScenario interference = small_scenario(spec, 4);
    interference.d = 0.0;
    const ChannelSnapshot i = synthesize(w, interference, 9);
    const InterferenceBasis basis = noise_free_basis(w, 4);
    const CMatrix& q = basis.orthonormal();
    const CVector residual = i.y_surv - q * (q.adjoint() * i.y_surv);
    CHECK(residual.norm() < 1e-10 * i.y_surv.norm());
}

TEST_CASE("synthesize is reproducible and linear in d") {
    const WaveformSpec spec = small_spec(256, 16);
    const IoWaveform w = generate_waveform(spec, 3);
    NodeScenario sc = small_scenario(spec, 4);
    sc.sigma_e2 = 0.1;
    sc.sigma_n2 = 0.01;
    const ChannelSnapshot a = synthesize(w, sc, 42);
    const ChannelSnapshot b = synthesize(w, sc, 42);
    CHECK((a.y_surv - b.y_surv).norm() == 0.0);
    CHECK((a.x_ref - b.x_ref).norm() == 0.0);
    CHECK((a.x_guard - b.x_guard).norm() == 0.0);

    NodeScenario no_target = sc;
    no_target.d = 0.0;
    const ChannelSnapshot c = synthesize(w, no_target, 42);
    const CVector diff = a.y_surv - c.y_surv;
    const CVector expect = sc.d * steering(w, sc.target.tau, sc.target.omega).values;
    CHECK(max_abs(diff - expect) < 1e-12);
}

TEST_CASE("DPI power accounting") {
    const WaveformSpec spec = small_spec(8192, 16);
    const IoWaveform w = generate_waveform(spec, 5);
    NodeScenario sc = small_scenario(spec, 0);
    sc.d = 0.0;
    const ChannelSnapshot s = synthesize(w, sc, 1);
    CHECK(std::abs(s.y_surv.squaredNorm() / 8192 / std::norm(sc.b) - 1.0) < 0.02);
}

TEST_CASE("scenario validation") {
    const WaveformSpec spec = small_spec(256, 16);
    const IoWaveform w = generate_waveform(spec, 3);
    NodeScenario sc = small_scenario(spec, 4);
    sc.target.tau = 17 * spec.dt();
    CHECK_THROWS_AS(synthesize(w, sc, 1), ConfigError);
    sc = small_scenario(spec, 17);
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = small_scenario(spec, 4);
    sc.sigma_e2 = -1.0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
}
