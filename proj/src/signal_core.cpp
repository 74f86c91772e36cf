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

#include "radar_lab/signal_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "radar_lab/errors.hpp"
#include "radar_lab/fft.hpp"

namespace radar_lab {

namespace {

int wrap(long long m, int p) {
    long long r = m % p;
    return static_cast<int>(r < 0 ? r + p : r);
}

// Phase of exp(-j 2 pi k u / P) reduced before scaling so that large k*u
// keeps full precision.
cplx delay_phasor(int k, double u, int p) {
    const double turns = std::fmod(static_cast<double>(k) * u, static_cast<double>(p)) / p;
    return std::polar(1.0, -kTwoPi * turns);
}

// exp(-j 2 pi k u / P) for every DFT bin, k = signed bin index. Uses a
// rotation recurrence re-anchored to the exact phasor every 32 steps.
std::vector<cplx> delay_phasors(double u, int p) {
    std::vector<cplx> out(static_cast<std::size_t>(p));
    const int k_pos = (p + 1) / 2;  // bins 0 .. k_pos-1 hold k = 0 .. k_pos-1
    const cplx step = delay_phasor(1, u, p);
    cplx cur{1.0, 0.0};
    for (int k = 0; k < k_pos; ++k) {
        cur = (k % 32 == 0) ? delay_phasor(k, u, p) : cur * step;
        out[static_cast<std::size_t>(k)] = cur;
    }
    // bin b >= k_pos holds k = b - p < 0; its phasor is the conjugate of |k|'s.
    cur = {1.0, 0.0};
    for (int m = 1; m <= p - k_pos; ++m) {
        cur = (m % 32 == 0 || m == 1) ? delay_phasor(m, u, p) : cur * step;
        out[static_cast<std::size_t>(p - m)] = std::conj(cur);
    }
    return out;
}

}  // namespace

int smooth_fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

void WaveformSpec::validate() const {
    if (!(sample_rate_hz > 0.0)) throw ConfigError("waveform: sample_rate must be positive");
    if (!(bandwidth_hz >= 0.0)) throw ConfigError("waveform: bandwidth must be non-negative");
    if (bandwidth_hz > sample_rate_hz)
        throw ConfigError("waveform: bandwidth " + std::to_string(bandwidth_hz) + " Hz exceeds sample rate " +
                          std::to_string(sample_rate_hz) + " Hz");
    if (n_samples <= 0) throw ConfigError("waveform: n_samples must be positive");
    if (max_delay_samples < 0) throw ConfigError("waveform: max_delay_samples must be non-negative");
    if (!(power > 0.0)) throw ConfigError("waveform: power must be positive");
}

// ---------------------------------------------------------------------------
// PeriodicSeries

PeriodicSeries::PeriodicSeries(double dt, std::vector<cplx> bins) : dt_(dt), bins_(std::move(bins)) {
    if (bins_.empty()) throw ConfigError("periodic series needs at least one bin");
}

PeriodicSeries PeriodicSeries::from_samples(double dt, int first_index, std::span<const cplx> samples) {
    const int p = static_cast<int>(samples.size());
    if (p == 0) throw ConfigError("periodic series needs at least one sample");
    std::vector<cplx> buf(samples.size());
    for (int i = 0; i < p; ++i) buf[wrap(static_cast<long long>(first_index) + i, p)] = samples[i];
    std::vector<cplx> bins(samples.size());
    fft::forward(buf, bins);
    for (auto& b : bins) b /= static_cast<double>(p);
    return PeriodicSeries(dt, std::move(bins));
}

int PeriodicSeries::signed_index(int bin) const {
    const int p = period();
    return bin < (p + 1) / 2 ? bin : bin - p;
}

cplx PeriodicSeries::evaluate(double t) const {
    const int p = period();
    const double u = t / dt_;
    cplx acc{0.0, 0.0};
    for (int b = 0; b < p; ++b) {
        if (bins_[b] == cplx{0.0, 0.0}) continue;
        // exp(+j 2 pi k u / P) == conj of the delay phasor
        acc += bins_[b] * std::conj(delay_phasor(signed_index(b), u, p));
    }
    return acc;
}

CVector PeriodicSeries::shifted(double tau, int n_from, int count, bool derivative) const {
    const int p = period();
    const double u = tau / dt_;
    const double omega_unit = kTwoPi / (p * dt_);
    std::vector<cplx> spec(bins_.size()), out(bins_.size());
    const std::vector<cplx> phasors = delay_phasors(u, p);
    for (int b = 0; b < p; ++b) {
        if (bins_[b] == cplx{0.0, 0.0}) continue;
        const int k = signed_index(b);
        cplx c = bins_[b] * phasors[static_cast<std::size_t>(b)];
        if (derivative) c *= cplx{0.0, -omega_unit * k};
        spec[b] = c;
    }
    fft::inverse(spec, out);
    CVector result(count);
    for (int i = 0; i < count; ++i) result[i] = out[wrap(static_cast<long long>(n_from) + i, p)];
    return result;
}

CVector PeriodicSeries::delayed(double tau, int n_from, int count) const {
    return shifted(tau, n_from, count, false);
}

CVector PeriodicSeries::delayed_derivative(double tau, int n_from, int count) const {
    return shifted(tau, n_from, count, true);
}

std::vector<cplx> PeriodicSeries::delayed_adjoint(double tau, int n_from, std::span<const cplx> values) const {
    const int p = period();
    std::vector<cplx> embed(bins_.size()), spec(bins_.size()), out(bins_.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        embed[wrap(static_cast<long long>(n_from) + static_cast<long long>(i), p)] += values[i];
    fft::forward(embed, spec);
    const double u = tau / dt_;
    const std::vector<cplx> phasors = delay_phasors(u, p);
    for (int b = 0; b < p; ++b) spec[b] *= std::conj(phasors[static_cast<std::size_t>(b)]) / static_cast<double>(p);
    fft::inverse(spec, out);
    return out;
}

PeriodicSeries PeriodicSeries::scaled(cplx factor) const {
    std::vector<cplx> b = bins_;
    for (auto& v : b) v *= factor;
    return PeriodicSeries(dt_, std::move(b));
}

// ---------------------------------------------------------------------------

CVector IoWaveform::samples(int n_from, int n_to) const { return series.delayed(0.0, n_from, n_to - n_from + 1); }

IoWaveform generate_waveform(const WaveformSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int p = spec.period();
    const double df = spec.sample_rate_hz / p;
    int k_max = static_cast<int>(std::floor(spec.bandwidth_hz / 2.0 / df * (1.0 + 1e-12)));
    // Keep every grid frequency strictly below the folding frequency so the
    // sampled series never aliases.
    k_max = std::min(k_max, (p - 1) / 2);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    std::vector<cplx> bins(static_cast<std::size_t>(p));
    IoWaveform w;
    w.spec = spec;
    w.seed = seed;
    for (int k = -k_max; k <= k_max; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        bins[wrap(k, p)] = {re, im};
    }
    PeriodicSeries raw(spec.dt(), std::move(bins));
    const CVector support = raw.delayed(0.0, -spec.max_delay_samples, spec.n_samples + spec.max_delay_samples);
    const double mean_power = support.squaredNorm() / static_cast<double>(support.size());
    if (!(mean_power > 0.0)) throw DegenerateBasisError("generated waveform has zero power", 0.0, 0.0);
    w.series = raw.scaled(std::sqrt(spec.power / mean_power));

    for (int k = -k_max; k <= k_max; ++k) {
        w.fourier_coefficients.push_back(w.series.bins()[wrap(k, p)]);
        w.frequency_grid.push_back(k * df);
    }
    return w;
}

CVector sample_delayed(const IoWaveform& w, double tau, int n_from, int n_to) {
    return w.series.delayed(tau, n_from, n_to - n_from + 1);
}

CVector doppler_vector(double omega, int n, double dt) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = std::polar(1.0, omega * (i * dt));
    return v;
}

SteeringContext steering(const IoWaveform& w, double tau, double omega) {
    const int n = w.spec.n_samples;
    const double dt = w.spec.dt();
    const CVector v = doppler_vector(omega, n, dt);
    SteeringContext ctx;
    ctx.tau = tau;
    ctx.omega = omega;
    ctx.values = w.series.delayed(tau, 0, n).cwiseProduct(v);
    ctx.d_tau = w.series.delayed_derivative(tau, 0, n).cwiseProduct(v);
    ctx.d_omega.resize(n);
    for (int i = 0; i < n; ++i) ctx.d_omega[i] = kJ * (i * dt) * ctx.values[i];
    return ctx;
}

// ---------------------------------------------------------------------------
// InterferenceBasis

InterferenceBasis::InterferenceBasis(CMatrix matrix, int n_clutter_taps)
    : matrix_(std::move(matrix)), n_clutter_taps_(n_clutter_taps) {
    const Eigen::Index rows = matrix_.rows();
    const Eigen::Index cols = matrix_.cols();
    if (cols == 0 || rows < cols) throw ConfigError("interference basis must be tall with at least one column");
    Eigen::HouseholderQR<CMatrix> qr(matrix_);
    const CMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<CMatrix> svd(r, Eigen::ComputeFullU);
    singular_values_ = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < cols && singular_values_(rank) > kRankTolerance * singular_values_(0)) ++rank;
    orthonormal_ = qr.householderQ() * (CMatrix::Identity(rows, cols) * svd.matrixU().leftCols(rank));
}

bool InterferenceBasis::full_rank() const {
    const double largest = singular_values_(0);
    const double smallest = singular_values_(singular_values_.size() - 1);
    return largest > 0.0 && smallest > kRankTolerance * largest;
}

InterferenceBasis clutter_basis(std::span<const cplx> samples, int n, int n_taps, RankPolicy policy) {
    if (n_taps < 0) throw ConfigError("clutter_basis: negative tap count");
    if (n_taps >= n - 1)
        throw ConfigError("clutter_basis: L=" + std::to_string(n_taps) + " must be below N-1=" + std::to_string(n - 1));
    if (static_cast<int>(samples.size()) != n + n_taps)
        throw ConfigError("clutter_basis: expected " + std::to_string(n + n_taps) + " samples, got " +
                          std::to_string(samples.size()));
    CMatrix m(n, n_taps + 1);
    for (int l = 0; l <= n_taps; ++l)
        for (int i = 0; i < n; ++i) m(i, l) = samples[static_cast<std::size_t>(i - l + n_taps)];
    InterferenceBasis basis(std::move(m), n_taps);
    if (basis.rank() == 0 || (policy == RankPolicy::strict && !basis.full_rank())) {
        const auto& sv = basis.singular_values();
        throw DegenerateBasisError("clutter_basis: interference matrix is rank deficient (smallest singular value " +
                                       std::to_string(sv(sv.size() - 1)) + ")",
                                   sv(sv.size() - 1), sv(0));
    }
    return basis;
}

}  // namespace radar_lab
