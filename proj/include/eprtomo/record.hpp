// Copyright 2026 The eprtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace eprtomo {

/// One simultaneous pair of homodyne outcomes with the nominal
/// local-oscillator phases they were taken at.
struct QuadratureRecord {
    std::uint64_t index = 0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    double q_a = 0.0;
    double q_b = 0.0;

    bool operator==(const QuadratureRecord &) const = default;
};

/// Phase reduced to [0, 2*pi).
inline double wrap_phase(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

/// True when two phases name the same quadrature within `tol` radians.
inline bool same_phase(double t1, double t2, double tol = 1e-6) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double d = wrap_phase(t1 - t2);
    return d <= tol || two_pi - d <= tol;
}

}  // namespace eprtomo
