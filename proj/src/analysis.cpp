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

#include "radar_lab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "radar_lab/errors.hpp"

namespace radar_lab {

namespace {

int wrap(long long m, int p) {
    long long r = m % p;
    return static_cast<int>(r < 0 ? r + p : r);
}

RMatrix symmetrized(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

// ---------------------------------------------------------------------------
// ProjectorTilde

ProjectorTilde::ProjectorTilde(const InterferenceBasis& noise_free_basis, const CVector& steering)
    : q_(noise_free_basis.orthonormal()) {
    if (steering.size() != q_.rows()) throw ConfigError("projector_tilde: steering length does not match basis");
    const CVector pa = steering - q_ * (q_.adjoint() * steering);
    const double energy = pa.squaredNorm();
    if (!(energy > 1e-12 * steering.squaredNorm()))
        throw DegenerateSteeringError("projector_tilde: target steering vector lies in the clutter span");
    p_unit_ = pa / std::sqrt(energy);
}

CVector ProjectorTilde::complement(const CVector& v) const { return v - q_ * (q_.adjoint() * v); }

CVector ProjectorTilde::apply(const CVector& v) const {
    const CVector w = complement(v);
    return w - p_unit_ * p_unit_.dot(w);
}

CMatrix ProjectorTilde::apply(const CMatrix& m) const {
    CMatrix w = m - q_ * (q_.adjoint() * m);
    w -= p_unit_ * (p_unit_.adjoint() * w);
    return w;
}

CMatrix ProjectorTilde::complement_dense() const {
    const Eigen::Index n = q_.rows();
    return CMatrix::Identity(n, n) - q_ * q_.adjoint();
}

CMatrix ProjectorTilde::rank_one_dense() const { return p_unit_ * p_unit_.adjoint(); }

CMatrix ProjectorTilde::dense() const { return complement_dense() - rank_one_dense(); }

ProjectorTilde projector_tilde(const InterferenceBasis& noise_free_basis, const CVector& steering) {
    return ProjectorTilde(noise_free_basis, steering);
}

// ---------------------------------------------------------------------------
// SelectionJ / ZMatrix

CVector SelectionJ::apply(const CVector& s_i) const {
    if (s_i.size() != cols()) throw ConfigError("SelectionJ: s_I has the wrong length");
    CVector out(rows());
    for (int r = 0; r < rows(); ++r) out[r] = s_i[index(r)];
    return out;
}

CVector SelectionJ::apply_transpose(const CVector& vec) const {
    if (vec.size() != rows()) throw ConfigError("SelectionJ: vector has the wrong length");
    CVector out = CVector::Zero(cols());
    for (int r = 0; r < rows(); ++r) out[index(r)] += vec[r];
    return out;
}

RMatrix SelectionJ::dense() const {
    RMatrix j = RMatrix::Zero(rows(), cols());
    for (int r = 0; r < rows(); ++r) j(r, index(r)) = 1.0;
    return j;
}

ZMatrix::ZMatrix(cplx b, cplx d, CVector doppler, std::vector<cplx> clutter)
    : b_(b), d_(d), v_(std::move(doppler)), c_(std::move(clutter)) {}

CVector ZMatrix::apply(const CVector& vec) const {
    const int n = rows();
    if (vec.size() != cols()) throw ConfigError("ZMatrix: vector has the wrong length");
    CVector out(n);
    for (int i = 0; i < n; ++i) out[i] = (b_ + d_ * v_[i]) * vec[i];
    for (std::size_t l = 0; l < c_.size(); ++l) out += c_[l] * vec.segment(static_cast<Eigen::Index>(l + 1) * n, n);
    return out;
}

CVector ZMatrix::adjoint(const CVector& w) const {
    const int n = rows();
    if (w.size() != n) throw ConfigError("ZMatrix: vector has the wrong length");
    CVector out(cols());
    for (int i = 0; i < n; ++i) out[i] = std::conj(b_ + d_ * v_[i]) * w[i];
    for (std::size_t l = 0; l < c_.size(); ++l)
        out.segment(static_cast<Eigen::Index>(l + 1) * n, n) = std::conj(c_[l]) * w;
    return out;
}

CMatrix ZMatrix::dense() const {
    const int n = rows();
    CMatrix z = CMatrix::Zero(n, cols());
    for (int i = 0; i < n; ++i) z(i, i) = b_ + d_ * v_[i];
    for (std::size_t l = 0; l < c_.size(); ++l)
        for (int i = 0; i < n; ++i) z(i, static_cast<Eigen::Index>(l + 1) * n + i) = c_[l];
    return z;
}

// ---------------------------------------------------------------------------
// ErrorMap

ErrorMap::ErrorMap(const NodeScenario& scenario, const IoWaveform& waveform, ErrorMapVariant variant)
    : variant_(variant),
      z_(scenario.b, scenario.d,
         doppler_vector(scenario.target.omega, waveform.spec.n_samples, waveform.spec.dt()), scenario.clutter_coeffs),
      j_(waveform.spec.n_samples, scenario.n_taps()),
      tau_(scenario.target.tau),
      grid_(waveform.series) {}

int ErrorMap::domain_size() const { return variant_ == ErrorMapVariant::verbatim ? j_.cols() : grid_.period(); }

CVector ErrorMap::apply(const CVector& delta) const {
    if (delta.size() != domain_size()) throw ConfigError("ErrorMap: perturbation has the wrong length");
    if (variant_ == ErrorMapVariant::verbatim) return z_.apply(j_.apply(delta));
    const int n = z_.rows();
    const int p = grid_.period();
    const auto& c = z_.clutter();
    const PeriodicSeries series =
        PeriodicSeries::from_samples(grid_.dt(), 0, {delta.data(), static_cast<std::size_t>(delta.size())});
    const CVector delayed = series.delayed(tau_, 0, n);
    CVector out(n);
    for (int i = 0; i < n; ++i) {
        cplx acc = z_.b() * delta[wrap(i, p)] + z_.d() * z_.doppler()[i] * delayed[i];
        for (std::size_t l = 0; l < c.size(); ++l) acc += c[l] * delta[wrap(i - static_cast<long long>(l) - 1, p)];
        out[i] = acc;
    }
    return out;
}

CVector ErrorMap::adjoint(const CVector& w) const {
    const int n = z_.rows();
    if (w.size() != n) throw ConfigError("ErrorMap: vector has the wrong length");
    if (variant_ == ErrorMapVariant::verbatim) return j_.apply_transpose(z_.adjoint(w));
    const int p = grid_.period();
    const auto& c = z_.clutter();
    std::vector<cplx> target_part(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) target_part[static_cast<std::size_t>(i)] = std::conj(z_.d() * z_.doppler()[i]) * w[i];
    const std::vector<cplx> back = grid_.delayed_adjoint(tau_, 0, target_part);
    CVector g(p);
    for (int m = 0; m < p; ++m) g[m] = back[static_cast<std::size_t>(m)];
    for (int i = 0; i < n; ++i) {
        g[wrap(i, p)] += std::conj(z_.b()) * w[i];
        for (std::size_t l = 0; l < c.size(); ++l) g[wrap(i - static_cast<long long>(l) - 1, p)] += std::conj(c[l]) * w[i];
    }
    return g;
}

CMatrix ErrorMap::dense() const {
    const int cols = domain_size();
    CMatrix m(z_.rows(), cols);
    CVector e = CVector::Zero(cols);
    for (int k = 0; k < cols; ++k) {
        e[k] = 1.0;
        m.col(k) = apply(e);
        e[k] = 0.0;
    }
    return m;
}

double ErrorMap::spectral_norm2(double tolerance, int max_iterations) const {
    // Lanczos on (ZJ)^H ZJ with full reorthogonalization; the largest Ritz
    // value approaches the largest eigenvalue from below.
    const int n = domain_size();
    const int max_steps = std::min({n, max_iterations, 400});
    RngStream rng(0x5EEDULL, {static_cast<std::uint64_t>(n)});
    CVector v(n);
    for (auto& x : v) x = {rng.normal(), rng.normal()};
    v.normalize();
    CMatrix basis(n, max_steps);
    std::vector<double> alpha, beta;
    double previous = 0.0;
    for (int k = 0; k < max_steps; ++k) {
        basis.col(k) = v;
        CVector w = adjoint(apply(v));
        alpha.push_back(std::real(v.dot(w)));
        for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).adjoint() * w);
        const double b = w.norm();
        const int m = k + 1;
        RMatrix t = RMatrix::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        const double top = Eigen::SelfAdjointEigenSolver<RMatrix>(t, Eigen::EigenvaluesOnly).eigenvalues()(m - 1);
        if (b <= 1e-14 * std::abs(top)) return top;  // invariant subspace found
        if (k > 0 && std::abs(top - previous) <= tolerance * std::abs(top)) return top;
        previous = top;
        beta.push_back(b);
        v = w / b;
    }
    return previous;
}

// ---------------------------------------------------------------------------
// Derivatives and covariance terms

std::vector<std::string> AnalysisSetup::parameter_names() const {
    if (target) return {"x_m", "y_m", "vx_m_s", "vy_m_s"};
    return {"tau_s", "omega_rad_s"};
}

CMatrix build_D(const IoWaveform& w, const DelayDoppler& at) {
    const SteeringContext ctx = steering(w, at.tau, at.omega);
    CMatrix d(ctx.values.size(), 2);
    d.col(0) = ctx.d_tau;
    d.col(1) = ctx.d_omega;
    return d;
}

CMatrix build_D(const IoWaveform& w, const NodeGeometry& g, const TargetState& theta) {
    const CMatrix local = build_D(w, delay_doppler(g, theta));
    const Eigen::Matrix<double, 2, 4> jac = jacobian(g, theta);
    return local * jac.cast<cplx>();
}

namespace {

struct NodeTerms {
    RMatrix h;       // 2 |d|^2 Re{D^H P~ D}
    RMatrix q_unit;  // 2 |d|^2 / |a|^2 Re{D^H P~ (ZJ)(ZJ)^H P~ D}
};

NodeScenario localized(const AnalysisNode& node, const std::optional<TargetState>& target) {
    NodeScenario sc = node.scenario;
    if (target) {
        if (!node.geometry) throw ConfigError("analysis: target-state mode needs a geometry for every node");
        sc.target = delay_doppler(*node.geometry, *target);
    }
    return sc;
}

NodeTerms node_terms(const AnalysisNode& node, const std::optional<TargetState>& target, ErrorMapVariant variant,
                     bool with_q) {
    if (!node.waveform) throw ConfigError("analysis: node has no waveform");
    const IoWaveform& w = *node.waveform;
    const NodeScenario sc = localized(node, target);
    const int n = w.spec.n_samples;
    const int l = sc.n_taps();

    const CVector s_i = w.samples(-l, n - 1);
    const InterferenceBasis basis = clutter_basis({s_i.data(), static_cast<std::size_t>(s_i.size())}, n, l);
    const SteeringContext ctx = steering(w, sc.target.tau, sc.target.omega);
    const CMatrix d = target ? build_D(w, *node.geometry, *target) : build_D(w, sc.target);
    const ProjectorTilde pt(basis, ctx.values);
    const CMatrix pd = pt.apply(d);

    NodeTerms terms;
    const double d2 = std::norm(sc.d);
    terms.h = 2.0 * d2 * (d.adjoint() * pd).real();
    if (with_q) {
        const ErrorMap zj(sc, w, variant);
        CMatrix g(zj.domain_size(), pd.cols());
        for (Eigen::Index k = 0; k < pd.cols(); ++k) g.col(k) = zj.adjoint(pd.col(k));
        terms.q_unit = 2.0 * d2 / std::norm(sc.a) * (g.adjoint() * g).real();
    }
    return terms;
}

void check_setup(const AnalysisSetup& setup) {
    if (setup.nodes.empty()) throw ConfigError("analysis: at least one node is required");
    if (!setup.target && setup.nodes.size() != 1)
        throw ConfigError("analysis: (tau, omega) mode covers exactly one node; set a target state for K > 1");
}

struct Assembled {
    RMatrix h;
    RMatrix q_unit;
};

Assembled assemble(const AnalysisSetup& setup, bool with_q) {
    check_setup(setup);
    const int p = setup.n_parameters();
    Assembled out{RMatrix::Zero(p, p), RMatrix::Zero(p, p)};
    for (const auto& node : setup.nodes) {
        const NodeTerms t = node_terms(node, setup.target, setup.variant, with_q);
        out.h += t.h;
        if (with_q) out.q_unit += t.q_unit;
    }
    out.h = symmetrized(out.h);
    out.q_unit = symmetrized(out.q_unit);
    // Judge conditioning on the unit-diagonal form; parameters carry very different units.
    const RVector diag = out.h.diagonal();
    if (!(diag.minCoeff() > 0.0)) throw IdentifiabilityError("analysis: Hessian has a non-positive diagonal entry");
    const RVector inv_sqrt = diag.cwiseSqrt().cwiseInverse();
    const RMatrix scaled = inv_sqrt.asDiagonal() * out.h * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(scaled);
    const auto& ev = eig.eigenvalues();
    if (!(ev(0) > 1e-12 * ev(ev.size() - 1)))
        throw IdentifiabilityError("analysis: Hessian is singular; parameters are not identifiable (smallest eigenvalue " +
                                   std::to_string(ev(0)) + ")");
    return out;
}

RMatrix inverse_spd(const RMatrix& m) {
    const RVector s = m.diagonal().cwiseSqrt().cwiseInverse();
    const RMatrix scaled = s.asDiagonal() * m * s.asDiagonal();
    const RMatrix inv = scaled.ldlt().solve(RMatrix::Identity(m.rows(), m.cols()));
    return symmetrized(s.asDiagonal() * inv * s.asDiagonal());
}

}  // namespace

RMatrix hessian_H(const AnalysisSetup& setup) { return assemble(setup, false).h; }

RMatrix crb(const AnalysisSetup& setup, double sigma_e2) {
    if (!(sigma_e2 >= 0.0)) throw ConfigError("crb: sigma_e^2 must be non-negative");
    return sigma_e2 * inverse_spd(hessian_H(setup));
}

RMatrix excess_Q(const AnalysisSetup& setup, double sigma_n2) {
    if (!(sigma_n2 >= 0.0)) throw ConfigError("excess_Q: sigma_n^2 must be non-negative");
    return sigma_n2 * assemble(setup, true).q_unit;
}

double CorollaryMargin::margin_db() const {
    if (lhs == 0.0 || std::isinf(rhs)) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(rhs / lhs);
}

CorollaryMargin corollary_margin(const AnalysisNode& node, ErrorMapVariant variant) {
    if (!node.waveform) throw ConfigError("corollary_margin: node has no waveform");
    const NodeScenario& sc = node.scenario;
    CorollaryMargin m;
    const double interference = (sc.n_taps() + 1) * (std::norm(sc.b) + std::norm(sc.d) + sc.clutter_power());
    if (interference == 0.0)
        m.lhs = 0.0;
    else
        m.lhs = sc.sigma_e2 > 0.0 ? interference / sc.sigma_e2 : std::numeric_limits<double>::infinity();
    m.rhs = sc.sigma_n2 > 0.0 ? std::norm(sc.a) / sc.sigma_n2 : std::numeric_limits<double>::infinity();
    m.zj_spectral = ErrorMap(sc, *node.waveform, variant).spectral_norm2();
    return m;
}

CovarianceReport total_covariance(const AnalysisSetup& setup, double sigma_e2, double sigma_n2, bool with_corollary) {
    if (!(sigma_e2 >= 0.0) || !(sigma_n2 >= 0.0)) throw ConfigError("noise variances must be non-negative");
    const Assembled a = assemble(setup, true);
    const RMatrix h_inv = inverse_spd(a.h);
    CovarianceReport r;
    r.parameters = setup.parameter_names();
    r.h = a.h;
    r.q = sigma_n2 * a.q_unit;
    r.crb = sigma_e2 * h_inv;
    r.excess = symmetrized(h_inv * r.q * h_inv);
    r.total = r.crb + r.excess;
    if (with_corollary) {
        for (const auto& node : setup.nodes) {
            AnalysisNode local = node;
            local.scenario = localized(node, setup.target);
            local.scenario.sigma_e2 = sigma_e2;
            local.scenario.sigma_n2 = sigma_n2;
            r.corollary.push_back(corollary_margin(local, setup.variant));
        }
    }
    return r;
}

}  // namespace radar_lab
