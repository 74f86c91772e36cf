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

#include <string>

#include "radar_lab/errors.hpp"
#include "radar_lab/estimator.hpp"
#include "radar_lab/kernels.hpp"

namespace radar_lab {

namespace {

std::span<const cplx> column(const CMatrix& m, Eigen::Index j) {
    return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

std::span<const cplx> view(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

Canceller Canceller::build(const InterferenceBasis& basis, CancellerSource source) {
    if (basis.rank() == 0) {
        const auto& sv = basis.singular_values();
        const double smallest = sv(sv.size() - 1);
        throw DegenerateBasisError("canceller: interference basis is rank deficient, smallest singular value " +
                                       std::to_string(smallest) + " vs largest " + std::to_string(sv(0)),
                                   smallest, sv(0));
    }
    Canceller c;
    c.q_ = basis.orthonormal();
    c.source_ = source;
    return c;
}

CVector Canceller::coefficients(const CVector& v) const {
    CVector coef(q_.cols());
    for (Eigen::Index j = 0; j < q_.cols(); ++j) coef[j] = kernels::dotc(column(q_, j), view(v));
    return coef;
}

CVector Canceller::apply(const CVector& v) const {
    const CVector coef = coefficients(v);
    CVector out = v;
    std::span<cplx> dst{out.data(), static_cast<std::size_t>(out.size())};
    for (Eigen::Index j = 0; j < q_.cols(); ++j) kernels::axpy(-coef[j], column(q_, j), dst);
    return out;
}

double Canceller::complement_norm2(const CVector& v) const {
    return kernels::norm2(view(v)) - coefficients(v).squaredNorm();
}

double criterion(const CVector& y, const CVector& a_hat, const Canceller& canceller) {
    const CVector u = canceller.apply(a_hat);
    const double den = kernels::norm2(view(u));
    const double scale = kernels::norm2(view(a_hat));
    if (!(den > kDegenerateSteering * scale))
        throw DegenerateSteeringError("criterion: steering vector lies in the interference span");
    return std::norm(kernels::dotc(view(u), view(y))) / den;
}

}  // namespace radar_lab
