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
#include <initializer_list>
#include <random>
#include <vector>

#include "radar_lab/scene.hpp"
#include "radar_lab/signal_core.hpp"

namespace radar_lab {

// Independent, reproducible random stream. Streams are addressed by a root
// seed plus a path of counters (sweep point, trial, channel, ...), so the
// draws of one trial never depend on how many other trials ran before it.
class RngStream {
public:
    RngStream(std::uint64_t root, std::initializer_list<std::uint64_t> path = {});
    static std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

    std::mt19937_64& engine() { return engine_; }
    double normal();

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

struct NodeScenario {
    WaveformSpec waveform_spec;
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};
    cplx d{0.0, 0.0};
    std::vector<cplx> clutter_coeffs;  // c_1 .. c_L
    double sigma_n2 = 0.0;             // reference channel noise variance
    double sigma_e2 = 0.0;             // surveillance channel noise variance
    DelayDoppler target;

    int n_taps() const { return static_cast<int>(clutter_coeffs.size()); }
    double clutter_power() const;
    double sc_snr_db() const;
    double rc_snr_db() const;
    void validate() const;
};

struct ChannelSnapshot {
    double dt = 0.0;
    CVector x_ref;    // reference samples t_{-M} .. t_{N-1}
    CVector y_surv;   // surveillance samples t_0 .. t_{N-1}
    CVector x_guard;  // reference samples t_{-M-G} .. t_{-M-1}; may be empty

    int n_samples() const { return static_cast<int>(y_surv.size()); }
    int max_delay_samples() const { return static_cast<int>(x_ref.size() - y_surv.size()); }
    // x(t_n) for n = n_from .. n_from + count - 1 within the recorded span
    CVector reference(int n_from, int count) const;
};

CVector complex_wgn(int n, double variance, RngStream& stream);

ChannelSnapshot synthesize(const IoWaveform& w, const NodeScenario& sc, std::uint64_t seed);

}  // namespace radar_lab
