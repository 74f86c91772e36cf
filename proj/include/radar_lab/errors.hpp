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

#include <stdexcept>
#include <string>
#include <vector>

namespace radar_lab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration values. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

// Interference basis (or waveform) without full column rank.
class DegenerateBasisError : public Error {
public:
    DegenerateBasisError(const std::string& what, double smallest, double largest)
        : Error(what), smallest_singular_value(smallest), largest_singular_value(largest) {}
    double smallest_singular_value;
    double largest_singular_value;
};

// Steering vector numerically inside the cancelled interference span.
class DegenerateSteeringError : public Error {
public:
    using Error::Error;
};

// Under-determined scenario or singular Fisher/Hessian matrix.
class IdentifiabilityError : public Error {
public:
    using Error::Error;
};

class NonFiniteObjectiveError : public Error {
public:
    NonFiniteObjectiveError(const std::string& what, std::vector<double> at)
        : Error(what), point(std::move(at)) {}
    std::vector<double> point;
};

}  // namespace radar_lab
