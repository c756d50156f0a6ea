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

#ifndef ISAC_GEOMETRY_H
#define ISAC_GEOMETRY_H

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace isac
{
    constexpr double speed_of_light = 299792458.0;
    constexpr double pi = 3.141592653589793238462643383279502884;

    struct Vec3
    {
        double x = 0.0, y = 0.0, z = 0.0;

        Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        Vec3 operator-() const { return {-x, -y, -z}; }
        Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        bool operator==(const Vec3 &o) const = default;

        double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
        double norm() const { return std::sqrt(x * x + y * y + z * z); }
    };

    inline Vec3 operator*(double s, const Vec3 &v) { return v * s; }

    inline double distance(const Vec3 &a, const Vec3 &b) { return (b - a).norm(); }

    // Zenith in [0, pi], azimuth in (-pi, pi]
    struct SphericalAngles
    {
        double zenith = 0.5 * pi;
        double azimuth = 0.0;
    };

    // Speed in m/s along a spherical direction
    struct Velocity
    {
        double speed = 0.0;
        SphericalAngles direction{};

        Vec3 vector() const;
    };

    class GeometryError : public std::runtime_error
    {
    public:
        explicit GeometryError(const std::string &msg) : std::runtime_error(msg) {}
    };

    // Wraps an angle into (-pi, pi]
    double wrap_azimuth(double phi);

    // Reflects a zenith angle into [0, pi], folding the azimuth when crossing a pole
    SphericalAngles normalize_angles(double zenith, double azimuth);

    Vec3 spherical_unit(const SphericalAngles &angles);

    // Direction of (to - from); throws GeometryError for coincident points (< 1e-9 m)
    SphericalAngles angles_between(const Vec3 &from, const Vec3 &to);

    // Places a single-bounce scatterer on the ellipse with foci anchor_a and anchor_b.
    // The scatterer lies along 'arrival' as seen from anchor_b and the path
    // anchor_a -> r_p -> anchor_b has length total_delay * c.
    Vec3 map_cluster_position(const Vec3 &anchor_a, const Vec3 &anchor_b,
                              const SphericalAngles &arrival, double total_delay);
}

#endif
