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

#include "radar_lab/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "radar_lab/errors.hpp"

namespace radar_lab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RngStream::derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(root);
    for (std::uint64_t counter : path) s = splitmix64(s ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
    return s;
}

RngStream::RngStream(std::uint64_t root, std::initializer_list<std::uint64_t> path)
    : engine_(derive_seed(root, path)) {}

double RngStream::normal() { return normal_(engine_); }

// ---------------------------------------------------------------------------

double NodeScenario::clutter_power() const {
    double p = 0.0;
    for (const cplx& c : clutter_coeffs) p += std::norm(c);
    return p;
}

double NodeScenario::sc_snr_db() const {
    return sigma_e2 > 0.0 ? 10.0 * std::log10(std::norm(d) / sigma_e2) : std::numeric_limits<double>::infinity();
}

double NodeScenario::rc_snr_db() const {
    return sigma_n2 > 0.0 ? 10.0 * std::log10(std::norm(a) / sigma_n2) : std::numeric_limits<double>::infinity();
}

void NodeScenario::validate() const {
    waveform_spec.validate();
    if (!(sigma_n2 >= 0.0) || !(sigma_e2 >= 0.0)) throw ConfigError("noise variances must be non-negative");
    if (n_taps() > waveform_spec.max_delay_samples)
        throw ConfigError("clutter length L=" + std::to_string(n_taps()) + " exceeds M=" +
                          std::to_string(waveform_spec.max_delay_samples));
    if (n_taps() >= waveform_spec.n_samples - 1) throw ConfigError("clutter length must be below N-1");
    const double max_tau = waveform_spec.max_delay_samples * waveform_spec.dt();
    if (!(target.tau >= 0.0) || target.tau > max_tau * (1.0 + 1e-12))
        throw ConfigError("target delay " + std::to_string(target.tau) + " s outside reference support [0, " +
                          std::to_string(max_tau) + "] s");
    if (!std::isfinite(target.omega)) throw ConfigError("target Doppler must be finite");
    if (a == cplx{0.0, 0.0}) throw ConfigError("reference amplitude a must be non-zero");
}

CVector ChannelSnapshot::reference(int n_from, int count) const {
    const int m = max_delay_samples();
    const int g = static_cast<int>(x_guard.size());
    CVector out(count);
    for (int i = 0; i < count; ++i) {
        const int n = n_from + i;
        if (n >= -m && n < n_samples()) {
            out[i] = x_ref[n + m];
        } else if (n >= -m - g && n < -m) {
            out[i] = x_guard[n + m + g];
        } else {
            throw ConfigError("reference sample index " + std::to_string(n) + " outside the recorded span");
        }
    }
    return out;
}

CVector complex_wgn(int n, double variance, RngStream& stream) {
    CVector v(n);
    if (variance == 0.0) {
        v.setZero();
        return v;
    }
    const double sd = std::sqrt(variance / 2.0);
    for (int i = 0; i < n; ++i) {
        const double re = stream.normal();
        const double im = stream.normal();
        v[i] = {sd * re, sd * im};
    }
    return v;
}

ChannelSnapshot synthesize(const IoWaveform& w, const NodeScenario& sc, std::uint64_t seed) {
    sc.validate();
    const WaveformSpec& spec = w.spec;
    if (spec.n_samples != sc.waveform_spec.n_samples || spec.max_delay_samples != sc.waveform_spec.max_delay_samples ||
        spec.sample_rate_hz != sc.waveform_spec.sample_rate_hz)
        throw ConfigError("scenario waveform spec does not match the generated waveform");
    const int n = spec.n_samples;
    const int m = spec.max_delay_samples;
    const int g = spec.guard_samples();
    const int l = sc.n_taps();

    // Reference channel over the whole record t_{-M-G} .. t_{N-1}.
    RngStream rc_stream(seed, {0});
    RngStream sc_stream(seed, {1});
    const CVector s_ref = w.samples(-m - g, n - 1);
    const CVector x_full = sc.a * s_ref + complex_wgn(n + m + g, sc.sigma_n2, rc_stream);

    ChannelSnapshot snap;
    snap.dt = spec.dt();
    snap.x_guard = x_full.head(g);
    snap.x_ref = x_full.tail(n + m);

    const CVector s_all = w.samples(-l, n - 1);  // t_{-L} .. t_{N-1}
    CVector y = sc.b * s_all.tail(n);
    for (int tap = 1; tap <= l; ++tap) y += sc.clutter_coeffs[tap - 1] * s_all.segment(l - tap, n);
    if (sc.d != cplx{0.0, 0.0}) {
        const CVector v = doppler_vector(sc.target.omega, n, spec.dt());
        y += sc.d * sample_delayed(w, sc.target.tau, 0, n - 1).cwiseProduct(v);
    }
    y += complex_wgn(n, sc.sigma_e2, sc_stream);
    snap.y_surv = std::move(y);
    return snap;
}

}  // namespace radar_lab
