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

#include "radar_lab/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radar_lab/errors.hpp"

namespace radar_lab {

TargetState EstimateResult::target_state() const {
    return TargetState::from_vector(Eigen::Vector4d(point.at(0), point.at(1), point.at(2), point.at(3)));
}

namespace {

struct Vertex {
    std::vector<double> z;  // normalized coordinates, x = start + z * scale
    double cost = 0.0;      // negated objective
};

}  // namespace

EstimateResult refine(const Objective& objective, std::span<const double> start, std::span<const double> scale,
                      const RefineOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0 || scale.size() != dim) throw ConfigError("refine: start and scale must have the same non-zero size");
    for (double s : scale)
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("refine: scale entries must be positive");

    EstimateResult result;
    std::vector<double> x(dim);
    auto cost_at = [&](const std::vector<double>& z) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = start[i] + z[i] * scale[i];
        const double f = objective(x);
        ++result.evaluations;
        if (!std::isfinite(f)) throw NonFiniteObjectiveError("refine: objective is not finite", x);
        return -f;
    };

    std::vector<Vertex> simplex(dim + 1);
    for (std::size_t v = 0; v <= dim; ++v) {
        simplex[v].z.assign(dim, 0.0);
        if (v > 0) simplex[v].z[v - 1] += 1.0;
        simplex[v].cost = cost_at(simplex[v].z);
    }

    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    auto along = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
        // out = centroid + coef * (centroid - from)
        for (std::size_t i = 0; i < dim; ++i) out[i] = centroid[i] + coef * (centroid[i] - from[i]);
    };
    auto by_cost = [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; };

    while (true) {
        std::stable_sort(simplex.begin(), simplex.end(), by_cost);
        double spread = 0.0;
        for (std::size_t v = 1; v <= dim; ++v)
            for (std::size_t i = 0; i < dim; ++i) spread = std::max(spread, std::abs(simplex[v].z[i] - simplex[0].z[i]));
        if (spread < options.tolerance) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iterations) break;
        ++result.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v < dim; ++v)
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].z[i] / static_cast<double>(dim);

        Vertex& worst = simplex[dim];
        along(options.reflection, worst.z, trial);
        const double f_reflect = cost_at(trial);

        if (f_reflect < simplex[0].cost) {
            along(options.reflection * options.expansion, worst.z, trial2);
            const double f_expand = cost_at(trial2);
            if (f_expand < f_reflect) {
                worst.z = trial2;
                worst.cost = f_expand;
            } else {
                worst.z = trial;
                worst.cost = f_reflect;
            }
            continue;
        }
        if (f_reflect < simplex[dim - 1].cost) {
            worst.z = trial;
            worst.cost = f_reflect;
            continue;
        }
        if (f_reflect < worst.cost) {
            along(options.reflection * options.contraction, worst.z, trial2);
            const double f_contract = cost_at(trial2);
            if (f_contract <= f_reflect) {
                worst.z = trial2;
                worst.cost = f_contract;
                continue;
            }
        } else {
            along(-options.contraction, worst.z, trial2);
            const double f_contract = cost_at(trial2);
            if (f_contract < worst.cost) {
                worst.z = trial2;
                worst.cost = f_contract;
                continue;
            }
        }
        for (std::size_t v = 1; v <= dim; ++v) {
            for (std::size_t i = 0; i < dim; ++i)
                simplex[v].z[i] = simplex[0].z[i] + options.shrink * (simplex[v].z[i] - simplex[0].z[i]);
            simplex[v].cost = cost_at(simplex[v].z);
        }
    }

    result.point.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) result.point[i] = start[i] + simplex[0].z[i] * scale[i];
    result.criterion_value = -simplex[0].cost;
    return result;
}

}  // namespace radar_lab
