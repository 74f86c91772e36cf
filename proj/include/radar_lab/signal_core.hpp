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
#include <memory>
#include <span>
#include <vector>

#include "radar_lab/types.hpp"

namespace radar_lab {

// Minimum number of samples added in front of the reference support when
// sizing the waveform period, so the series is not periodic over the observed
// record itself. The period is then rounded up to a 7-smooth FFT length.
inline constexpr int kGuardSamples = 16;

// Smallest n' >= n whose prime factors are all 2, 3, 5 or 7.
int smooth_fft_size(int n);

struct WaveformSpec {
    double bandwidth_hz = 8e6;
    double sample_rate_hz = 25e6;
    int n_samples = 8192;        // N, surveillance samples t_0 .. t_{N-1}
    int max_delay_samples = 80;  // M, reference starts at t_{-M}
    double power = 1.0;          // mean |s|^2 over n = -M .. N-1

    double dt() const { return 1.0 / sample_rate_hz; }
    double duration() const { return n_samples * dt(); }
    // One DFT bin of the surveillance window, 2 pi / T.
    double doppler_bin() const { return kTwoPi / duration(); }
    int period() const { return smooth_fft_size(n_samples + max_delay_samples + kGuardSamples); }
    int guard_samples() const { return period() - n_samples - max_delay_samples; }
    void validate() const;
};

// Complex signal x(t) = sum_k X_k exp(j 2 pi k t / (P dt)) with period P dt.
// Bins are stored in DFT order; bin b represents signed index k = b for
// b < ceil(P/2) and k = b - P otherwise. Any P consecutive samples determine
// the series, and delayed evaluation is exact for any real delay.
class PeriodicSeries {
public:
    PeriodicSeries() = default;
    PeriodicSeries(double dt, std::vector<cplx> bins);

    // Trigonometric interpolant of samples taken at t_m, m = first_index ... first_index + size - 1.
    static PeriodicSeries from_samples(double dt, int first_index, std::span<const cplx> samples);

    int period() const { return static_cast<int>(bins_.size()); }
    double dt() const { return dt_; }
    const std::vector<cplx>& bins() const { return bins_; }
    int signed_index(int bin) const;

    // Direct series summation at one instant; O(P). Used by oracles.
    cplx evaluate(double t) const;

    // element i = x(t_{n_from + i} - tau)
    CVector delayed(double tau, int n_from, int count) const;
    // element i = d/dtau x(t_{n_from + i} - tau)
    CVector delayed_derivative(double tau, int n_from, int count) const;
    // Adjoint of `delayed(tau, n_from, count)` seen as a map on one period of
    // integer samples (index m stored at position mod(m, P)).
    std::vector<cplx> delayed_adjoint(double tau, int n_from, std::span<const cplx> values) const;

    PeriodicSeries scaled(cplx factor) const;

private:
    CVector shifted(double tau, int n_from, int count, bool derivative) const;

    double dt_ = 1.0;
    std::vector<cplx> bins_;
};

struct IoWaveform {
    WaveformSpec spec;
    std::uint64_t seed = 0;
    PeriodicSeries series;
    std::vector<cplx> fourier_coefficients;  // in-band coefficients, ascending frequency
    std::vector<double> frequency_grid;      // Hz, matches fourier_coefficients

    cplx at(double t) const { return series.evaluate(t); }
    // s(t_n) for n = n_from .. n_to inclusive
    CVector samples(int n_from, int n_to) const;
};

struct SteeringContext {
    double tau = 0.0;
    double omega = 0.0;
    CVector values;   // s(t_n - tau) e^{j omega t_n}
    CVector d_tau;    // partial wrt tau
    CVector d_omega;  // partial wrt omega, = j t_n values[n]
};

inline constexpr double kRankTolerance = 1e-8;

// How clutter_basis treats a basis whose smallest singular value falls below
// kRankTolerance times the largest.
//   numerical_range: accept; projections use the numerical range only.
//   strict:          reject with DegenerateBasisError.
enum class RankPolicy { numerical_range, strict };

// Interference matrix [x, X] whose column l holds samples at t_{n-l},
// n = 0..N-1. The thin orthonormal factor and the singular values are
// computed on construction.
class InterferenceBasis {
public:
    InterferenceBasis(CMatrix matrix, int n_clutter_taps);

    const CMatrix& matrix() const { return matrix_; }
    int n_clutter_taps() const { return n_clutter_taps_; }
    // Orthonormal basis of the numerical range (singular values above
    // kRankTolerance times the largest); N x rank().
    const CMatrix& orthonormal() const { return orthonormal_; }
    const RVector& singular_values() const { return singular_values_; }
    int rank() const { return static_cast<int>(orthonormal_.cols()); }
    bool full_rank() const;

private:
    CMatrix matrix_;
    int n_clutter_taps_ = 0;
    CMatrix orthonormal_;
    RVector singular_values_;
};

IoWaveform generate_waveform(const WaveformSpec& spec, std::uint64_t seed);

CVector sample_delayed(const IoWaveform& w, double tau, int n_from, int n_to);

CVector doppler_vector(double omega, int n, double dt);

SteeringContext steering(const IoWaveform& w, double tau, double omega);

// `samples` covers indices -L .. N-1 (length N + L).
InterferenceBasis clutter_basis(std::span<const cplx> samples, int n, int n_taps,
                                RankPolicy policy = RankPolicy::numerical_range);

}  // namespace radar_lab
