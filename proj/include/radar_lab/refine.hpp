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

#include <functional>
#include <span>
#include <vector>

#include "radar_lab/scene.hpp"

namespace radar_lab {

struct EstimateResult {
    std::vector<double> point;  // (tau, omega) for one node, (x, y, vx, vy) globally
    double criterion_value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;

    DelayDoppler delay_doppler() const { return {point.at(0), point.at(1)}; }
    TargetState target_state() const;
};

struct RefineOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    // Stop once every vertex lies within tolerance * scale of the best one on every axis.
    double tolerance = 1e-6;
    int max_iterations = 500;
};

using Objective = std::function<double(std::span<const double>)>;

// Nelder-Mead maximization of `objective`, run as minimization of its
// negation. The initial simplex is `start` plus one vertex offset by
// scale[i] along each axis i.
EstimateResult refine(const Objective& objective, std::span<const double> start, std::span<const double> scale,
                      const RefineOptions& options = {});

}  // namespace radar_lab
