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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radar_lab/scene.hpp"
#include "radar_lab/signal_core.hpp"
#include "radar_lab/synth.hpp"

namespace radar_lab {

// Orthogonal projector Pi_perp - P, where P projects onto Pi_perp a. Kept in
// operator form: the N x N matrix is only materialized on request.
class ProjectorTilde {
public:
    ProjectorTilde(const InterferenceBasis& noise_free_basis, const CVector& steering);

    CVector apply(const CVector& v) const;
    CMatrix apply(const CMatrix& m) const;
    CVector complement(const CVector& v) const;  // Pi_perp v

    CMatrix dense() const;
    CMatrix complement_dense() const;  // Pi_perp
    CMatrix rank_one_dense() const;    // P
    int n_samples() const { return static_cast<int>(q_.rows()); }

private:
    CMatrix q_;        // orthonormal basis of span(S_I)
    CVector p_unit_;   // Pi_perp a / ||Pi_perp a||
};

ProjectorTilde projector_tilde(const InterferenceBasis& noise_free_basis, const CVector& steering);

// Row r of vec(S_I) picks s_I[J(r)], with s_I = [s(t_{-L}), ..., s(t_{N-1})].
class SelectionJ {
public:
    SelectionJ(int n_samples, int n_taps) : n_(n_samples), l_(n_taps) {}

    int rows() const { return n_ * (l_ + 1); }
    int cols() const { return n_ + l_; }
    // Column l of S_I holds s(t_{n-l}), i.e. s_I index n - l + L.
    int index(int row) const { return row % n_ - row / n_ + l_; }

    CVector apply(const CVector& s_i) const;            // vec(S_I)
    CVector apply_transpose(const CVector& vec) const;  // J^T vec
    RMatrix dense() const;

private:
    int n_;
    int l_;
};

// Z = [b I + d diag(v(omega)), c^T (x) I] in block form.
class ZMatrix {
public:
    ZMatrix(cplx b, cplx d, CVector doppler, std::vector<cplx> clutter);

    int rows() const { return static_cast<int>(v_.size()); }
    int cols() const { return rows() * (static_cast<int>(c_.size()) + 1); }

    CVector apply(const CVector& vec) const;    // N(L+1) -> N
    CVector adjoint(const CVector& w) const;    // N -> N(L+1)
    CMatrix dense() const;

    cplx b() const { return b_; }
    cplx d() const { return d_; }
    const CVector& doppler() const { return v_; }
    const std::vector<cplx>& clutter() const { return c_; }

private:
    cplx b_, d_;
    CVector v_;
    std::vector<cplx> c_;
};

// Which first-order map carries reference noise into the surveillance fit.
//   verbatim: Z J acting on s_I, the target term using undelayed samples.
//   shifted:  target term acting on the reference noise delayed by tau,
//             over one full waveform period.
enum class ErrorMapVariant { verbatim, shifted };

// Matrix-free Z J (or its shifted counterpart) with its adjoint.
class ErrorMap {
public:
    ErrorMap(const NodeScenario& scenario, const IoWaveform& waveform, ErrorMapVariant variant);

    int domain_size() const;
    CVector apply(const CVector& delta) const;
    CVector adjoint(const CVector& w) const;
    CMatrix dense() const;
    // Largest squared singular value, by Lanczos iteration on (ZJ)^H ZJ.
    double spectral_norm2(double tolerance = 1e-8, int max_iterations = 400) const;

private:
    ErrorMapVariant variant_;
    ZMatrix z_;
    SelectionJ j_;
    double tau_ = 0.0;
    PeriodicSeries grid_;  // only its period/dt are used for the shifted variant
};

struct AnalysisNode {
    std::shared_ptr<const IoWaveform> waveform;
    NodeScenario scenario;
    std::optional<NodeGeometry> geometry;  // required in target-state mode
};

struct AnalysisSetup {
    std::vector<AnalysisNode> nodes;
    // Set: parameters are (x, y, vx, vy) and each node's (tau, omega) follow
    // from its geometry. Unset: a single node parameterized by (tau, omega).
    std::optional<TargetState> target;
    ErrorMapVariant variant = ErrorMapVariant::verbatim;

    int n_parameters() const { return target ? 4 : 2; }
    std::vector<std::string> parameter_names() const;
};

// Single node: columns [da/dtau, da/domega].
CMatrix build_D(const IoWaveform& w, const DelayDoppler& at);
// Target-state mode: chain rule through the scene Jacobian.
CMatrix build_D(const IoWaveform& w, const NodeGeometry& g, const TargetState& theta);

RMatrix hessian_H(const AnalysisSetup& setup);
RMatrix crb(const AnalysisSetup& setup, double sigma_e2);
RMatrix excess_Q(const AnalysisSetup& setup, double sigma_n2);

struct CorollaryMargin {
    double lhs = 0.0;  // (L+1)(|b|^2 + |d|^2 + ||c||^2) / sigma_e^2
    double rhs = 0.0;  // |a|^2 / sigma_n^2
    double zj_spectral = 0.0;  // ||Z J||_2^2
    double margin_db() const;
    bool satisfied(double required_db) const { return margin_db() >= required_db; }
};

CorollaryMargin corollary_margin(const AnalysisNode& node, ErrorMapVariant variant = ErrorMapVariant::verbatim);

struct CovarianceReport {
    std::vector<std::string> parameters;
    RMatrix crb;
    RMatrix excess;  // H^-1 Q H^-1
    RMatrix total;
    RMatrix h;
    RMatrix q;
    std::vector<CorollaryMargin> corollary;
};

inline constexpr double kCorollaryRequiredDb = 10.0;

CovarianceReport total_covariance(const AnalysisSetup& setup, double sigma_e2, double sigma_n2,
                                  bool with_corollary = true);

}  // namespace radar_lab
