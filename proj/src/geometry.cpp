// SPDX-License-Identifier: Apache-2.0
//
// isac-gbsm: geometry-based stochastic channel simulator for bistatic ISAC
// Copyright (C) 2026 The isac-gbsm authors
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

#include "isac/geometry.hpp"

namespace isac
{
    Vec3 Velocity::vector() const
    {
        return spherical_unit(direction) * speed;
    }

    double wrap_azimuth(double phi)
    {
        double w = std::remainder(phi, 2.0 * pi); // [-pi, pi]
        if (w <= -pi)
            w += 2.0 * pi;
        return w;
    }

    SphericalAngles normalize_angles(double zenith, double azimuth)
    {
        double t = std::fmod(zenith, 2.0 * pi);
        if (t < 0.0)
            t += 2.0 * pi;
        if (t > pi)
        {
            t = 2.0 * pi - t;
            azimuth += pi;
        }
        return {t, wrap_azimuth(azimuth)};
    }

    Vec3 spherical_unit(const SphericalAngles &a)
    {
        const double st = std::sin(a.zenith);
        return {st * std::cos(a.azimuth), st * std::sin(a.azimuth), std::cos(a.zenith)};
    }

    SphericalAngles angles_between(const Vec3 &from, const Vec3 &to)
    {
        const Vec3 d = to - from;
        const double n = d.norm();
        if (n < 1e-9)
            throw GeometryError("angles_between: coincident points");
        const double c = std::clamp(d.z / n, -1.0, 1.0);
        const double theta = std::acos(c);
        const double phi = (d.x == 0.0 && d.y == 0.0) ? 0.0 : std::atan2(d.y, d.x);
        return {theta, wrap_azimuth(phi)};
    }

    Vec3 map_cluster_position(const Vec3 &anchor_a, const Vec3 &anchor_b,
                              const SphericalAngles &arrival, double total_delay)
    {
        const Vec3 d = anchor_b - anchor_a;
        const double dn = d.norm();
        const double dp = total_delay * speed_of_light;
        const Vec3 a_hat = spherical_unit(arrival);

        // |d + |a| a_hat| = dp - |a|
        const double denom = 2.0 * (dp + d.dot(a_hat));
        const double numer = dp * dp - dn * dn;
        if (!(denom > 0.0))
            throw GeometryError("map_cluster_position: non-positive denominator");
        const double leg = numer / denom;
        if (!(leg > 0.0) || !(leg < dp))
            throw GeometryError("map_cluster_position: infeasible leg length");
        return anchor_b + a_hat * leg;
    }
}
