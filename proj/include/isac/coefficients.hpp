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

#ifndef ISAC_COEFFICIENTS_H
#define ISAC_COEFFICIENTS_H

#include "isac/geometry.hpp"
#include "isac/smallscale.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace isac
{
    using cd = std::complex<double>;

    enum class CaseLabel
    {
        LoS_back,
        NLoS_back,
        LoS_tar,
        SNLoS1, // Tx-target LoS, target-Rx stochastic cluster
        DNLoS1, // Tx-target LoS, target-Rx deterministic cluster
        SNLoS2, // Tx-target stochastic cluster, target-Rx LoS
        DNLoS2, // Tx-target deterministic cluster, target-Rx LoS
        SNLoS3, // stochastic clusters on both links
        DNLoS3  // deterministic clusters on both links
    };

    std::string to_string(CaseLabel c);
    CaseLabel parse_case_label(const std::string &s);
    const std::array<CaseLabel, 9> &all_case_labels();

    struct FieldPattern
    {
        enum Kind
        {
            isotropic,
            tr38901_element
        } kind = isotropic;
        double boresight_azimuth = 0.0; // radians
        double boresight_zenith = 0.5 * pi;

        // (F_theta, F_phi) for a vertically polarized element
        std::array<cd, 2> evaluate(const SphericalAngles &gcs) const;
    };

    struct PolarizationMatrix
    {
        cd tt{1.0, 0.0}, tp{0.0, 0.0}, pt{0.0, 0.0}, pp{-1.0, 0.0};

        static PolarizationMatrix los();
        // kappa may be +inf, which removes the cross-polar terms
        static PolarizationMatrix nlos(double kappa, const PhaseQuad &phases);

        double frobenius_sq() const;
    };

    struct AntennaArray
    {
        Vec3 position;
        std::vector<Vec3> element_offsets;
        FieldPattern pattern;

        std::size_t size() const { return element_offsets.size(); }
    };

    // rows x cols URA in the vertical plane facing boresight_azimuth, centered on 'position'
    AntennaArray make_ura(const Vec3 &position, int rows, int cols, double spacing_m, double boresight_azimuth,
                          FieldPattern::Kind pattern = FieldPattern::isotropic);

    struct DopplerTerm
    {
        Vec3 direction;
        Vec3 velocity;
    };

    // One resolved path: everything except the per-element and per-time factors
    struct RayCoefficient
    {
        CaseLabel label = CaseLabel::LoS_back;
        cd gamma{0.0, 0.0};
        SphericalAngles tx_angles, rx_angles;
        PolarizationMatrix cpm;
        std::array<DopplerTerm, 4> doppler{};
        int n_doppler = 0;
        double delay = 0.0;

        void add_doppler(const Vec3 &direction, const Vec3 &velocity);
        double doppler_hz(double wavelength) const;
    };

    cd spatial_phase(const Vec3 &direction, const Vec3 &element_offset, double wavelength);
    cd doppler_phase(const Vec3 &direction, const Vec3 &rel_velocity, double t, double wavelength);

    class ContextError : public std::runtime_error
    {
    public:
        explicit ContextError(const std::string &msg) : std::runtime_error(msg) {}
    };

    struct BackgroundRayContext
    {
        std::optional<double> distance; // LoS, meters
        std::optional<double> power;    // NLoS, P_{n,m}
        std::optional<double> xpr;      // NLoS, linear
        std::optional<PhaseQuad> phases;
        std::optional<SphericalAngles> tx_angles, rx_angles;
        Vec3 v_tx, v_rx;
        double delay = 0.0;
    };

    struct TargetRayContext
    {
        std::optional<double> sigma_target;     // sigma_{l,k}
        std::optional<double> sigma_cluster_tx; // sigma_{p1,k1}
        std::optional<double> sigma_cluster_rx; // sigma_{p2,k2}
        std::optional<double> power_tx;         // P_{n1,m1} or P_{p1,k1}
        std::optional<double> power_rx;         // P_{n2,m2} or P_{p2,k2}
        std::optional<double> bistatic_distance;
        std::optional<double> xpr;
        std::optional<PhaseQuad> phases;
        std::optional<SphericalAngles> tx_angles, rx_angles;
        std::optional<Vec3> cluster_dir_tx; // at the target, toward the Tx-side scatterer
        std::optional<Vec3> cluster_dir_rx; // at the target, toward the Rx-side scatterer
        Vec3 v_tx, v_rx, v_target, v_cluster_tx, v_cluster_rx;
        double delay = 0.0;
    };

    RayCoefficient resolve_background(CaseLabel label, const BackgroundRayContext &ctx, double wavelength);
    RayCoefficient resolve_target(CaseLabel label, const TargetRayContext &ctx, double wavelength);

    // Value of a resolved path for one antenna pair at time t
    cd coefficient_value(const RayCoefficient &rc, const AntennaArray &tx, std::size_t s, const AntennaArray &rx,
                         std::size_t u, double t, double wavelength);

    cd background_coefficient(CaseLabel label, const BackgroundRayContext &ctx, const AntennaArray &tx, std::size_t s,
                              const AntennaArray &rx, std::size_t u, double t, double wavelength);
    cd target_coefficient(CaseLabel label, const TargetRayContext &ctx, const AntennaArray &tx, std::size_t s,
                          const AntennaArray &rx, std::size_t u, double t, double wavelength);

    // Fills out[(snap * n_rx + u) * n_tx + s] += weight * value for all pairs and snapshots
    void accumulate_path(const RayCoefficient &rc, const AntennaArray &tx, const AntennaArray &rx,
                         const std::vector<double> &times, double wavelength, cd weight, cd *out);
}

#endif
