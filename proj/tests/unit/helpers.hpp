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

#include <cmath>
#include <cstdint>
#include <memory>

#include "radar_lab/analysis.hpp"
#include "radar_lab/estimator.hpp"
#include "radar_lab/signal_core.hpp"
#include "radar_lab/synth.hpp"

namespace testing {

using namespace radar_lab;

inline CVector random_vector(int n, std::uint64_t seed) {
    RngStream rng(seed, {99});
    CVector v(n);
    for (auto& x : v) x = {rng.normal(), rng.normal()};
    return v;
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rel_err(const CVector& a, const CVector& b) { return (a - b).norm() / b.norm(); }

inline WaveformSpec small_spec(int n = 256, int m = 24, double bandwidth = 8e6) {
    WaveformSpec s;
    s.bandwidth_hz = bandwidth;
    s.sample_rate_hz = 25e6;
    s.n_samples = n;
    s.max_delay_samples = m;
    s.power = 1.0;
    return s;
}

// Single-node scenario with DPI, decaying clutter and a target between taps
// moving at a fraction of a Doppler bin.
inline NodeScenario small_scenario(const WaveformSpec& spec, int n_taps = 4, double tau_samples = 6.3,
                                   double omega_bins = 0.37) {
    NodeScenario sc;
    sc.waveform_spec = spec;
    sc.a = {0.8, 0.6};
    sc.b = {3.0, -1.0};
    sc.d = {0.2, 0.1};
    for (int l = 0; l < n_taps; ++l) sc.clutter_coeffs.push_back(std::polar(0.6 * std::pow(0.7, l), 0.9 * l + 0.3));
    sc.target.tau = tau_samples * spec.dt();
    sc.target.omega = omega_bins * spec.doppler_bin();
    return sc;
}

inline InterferenceBasis noise_free_basis(const IoWaveform& w, int n_taps) {
    const int n = w.spec.n_samples;
    const CVector s = w.samples(-n_taps, n - 1);
    return clutter_basis({s.data(), static_cast<std::size_t>(s.size())}, n, n_taps);
}

}  // namespace testing
