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

#include "isac/coefficients.hpp"

#include <cmath>
#include <limits>

namespace isac
{
    static const std::array<CaseLabel, 9> labels = {
        CaseLabel::LoS_back, CaseLabel::NLoS_back, CaseLabel::LoS_tar,
        CaseLabel::SNLoS1, CaseLabel::DNLoS1, CaseLabel::SNLoS2,
        CaseLabel::DNLoS2, CaseLabel::SNLoS3, CaseLabel::DNLoS3};
    static const std::array<const char *, 9> names = {
        "LoS_back", "NLoS_back", "LoS_tar", "SNLoS1", "DNLoS1", "SNLoS2", "DNLoS2", "SNLoS3", "DNLoS3"};

    const std::array<CaseLabel, 9> &all_case_labels() { return labels; }

    std::string to_string(CaseLabel c)
    {
        return names[static_cast<std::size_t>(c)];
    }

    CaseLabel parse_case_label(const std::string &s)
    {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (s == names[i])
                return labels[i];
        throw std::invalid_argument("unknown case label '" + s + "'");
    }

    std::array<cd, 2> FieldPattern::evaluate(const SphericalAngles &g) const
    {
        if (kind == isotropic)
            return {cd(1.0, 0.0), cd(0.0, 0.0)};
        // TR38.901 single element, local angles from the boresight orientation
        constexpr double deg = 180.0 / pi;
        const double theta = (g.zenith - (boresight_zenith - 0.5 * pi)) * deg;
        const double phi = wrap_azimuth(g.azimuth - boresight_azimuth) * deg;
        const double av = -std::min(12.0 * std::pow((theta - 90.0) / 65.0, 2.0), 30.0);
        const double ah = -std::min(12.0 * std::pow(phi / 65.0, 2.0), 30.0);
        const double a_db = -std::min(-(av + ah), 30.0) + 8.0;
        return {cd(std::pow(10.0, a_db / 20.0), 0.0), cd(0.0, 0.0)};
    }

    PolarizationMatrix PolarizationMatrix::los()
    {
        return {};
    }

    PolarizationMatrix PolarizationMatrix::nlos(double kappa, const PhaseQuad &ph)
    {
        if (!(kappa > 0.0))
            throw std::invalid_argument("XPR must be positive");
        const double x = std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / kappa);
        PolarizationMatrix c;
        c.tt = std::polar(1.0, ph[0]);
        c.tp = std::polar(x, ph[1]);
        c.pt = std::polar(x, ph[2]);
        c.pp = std::polar(1.0, ph[3]);
        return c;
    }

    double PolarizationMatrix::frobenius_sq() const
    {
        return std::norm(tt) + std::norm(tp) + std::norm(pt) + std::norm(pp);
    }

    AntennaArray make_ura(const Vec3 &position, int rows, int cols, double spacing, double boresight_azimuth,
                          FieldPattern::Kind pattern)
    {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("array needs at least one row and column");
        AntennaArray a;
        a.position = position;
        a.pattern.kind = pattern;
        a.pattern.boresight_azimuth = boresight_azimuth;
        const Vec3 h{-std::sin(boresight_azimuth), std::cos(boresight_azimuth), 0.0};
        const Vec3 v{0.0, 0.0, 1.0};
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                a.element_offsets.push_back(h * ((c - 0.5 * (cols - 1)) * spacing) +
                                            v * ((r - 0.5 * (rows - 1)) * spacing));
        return a;
    }

    void RayCoefficient::add_doppler(const Vec3 &direction, const Vec3 &velocity)
    {
        if (n_doppler >= 4)
            throw std::logic_error("too many Doppler terms");
        doppler[n_doppler++] = {direction, velocity};
    }

    double RayCoefficient::doppler_hz(double wavelength) const
    {
        double f = 0.0;
        for (int i = 0; i < n_doppler; ++i)
            f += doppler[i].direction.dot(doppler[i].velocity);
        return f / wavelength;
    }

    cd spatial_phase(const Vec3 &direction, const Vec3 &offset, double wavelength)
    {
        return std::polar(1.0, 2.0 * pi * direction.dot(offset) / wavelength);
    }

    cd doppler_phase(const Vec3 &direction, const Vec3 &v, double t, double wavelength)
    {
        return std::polar(1.0, 2.0 * pi * direction.dot(v) * t / wavelength);
    }

    template <typename T>
    static const T &need(const std::optional<T> &o, const char *what, CaseLabel c)
    {
        if (!o)
            throw ContextError(std::string("missing '") + what + "' for case " + to_string(c));
        return *o;
    }

    static double need_nonneg(const std::optional<double> &o, const char *what, CaseLabel c)
    {
        const double v = need(o, what, c);
        if (!(v >= 0.0))
            throw ContextError(std::string("negative '") + what + "' for case " + to_string(c));
        return v;
    }

    static cd alpha(double d, double wavelength)
    {
        return std::polar(1.0, -2.0 * pi * d / wavelength);
    }

    RayCoefficient resolve_background(CaseLabel label, const BackgroundRayContext &ctx, double wavelength)
    {
        RayCoefficient rc;
        rc.label = label;
        rc.delay = ctx.delay;
        rc.tx_angles = need(ctx.tx_angles, "tx_angles", label);
        rc.rx_angles = need(ctx.rx_angles, "rx_angles", label);
        switch (label)
        {
        case CaseLabel::LoS_back:
            rc.gamma = alpha(need_nonneg(ctx.distance, "distance", label), wavelength);
            rc.cpm = PolarizationMatrix::los();
            break;
        case CaseLabel::NLoS_back:
            rc.gamma = std::sqrt(need_nonneg(ctx.power, "power", label));
            rc.cpm = PolarizationMatrix::nlos(need(ctx.xpr, "xpr", label), need(ctx.phases, "phases", label));
            break;
        default:
            throw ContextError("case " + to_string(label) + " is not a background case");
        }
        rc.add_doppler(spherical_unit(rc.tx_angles), ctx.v_tx);
        rc.add_doppler(spherical_unit(rc.rx_angles), ctx.v_rx);
        return rc;
    }

    RayCoefficient resolve_target(CaseLabel label, const TargetRayContext &ctx, double wavelength)
    {
        RayCoefficient rc;
        rc.label = label;
        rc.delay = ctx.delay;
        rc.tx_angles = need(ctx.tx_angles, "tx_angles", label);
        rc.rx_angles = need(ctx.rx_angles, "rx_angles", label);
        const Vec3 r_tx = spherical_unit(rc.tx_angles);
        const Vec3 r_rx = spherical_unit(rc.rx_angles);
        const double sigma = need_nonneg(ctx.sigma_target, "sigma_target", label);
        const Vec3 &vl = ctx.v_target;

        auto nlos_cpm = [&]
        {
            return PolarizationMatrix::nlos(need(ctx.xpr, "xpr", label), need(ctx.phases, "phases", label));
        };

        switch (label)
        {
        case CaseLabel::LoS_tar:
            rc.gamma = std::sqrt(sigma) * alpha(need_nonneg(ctx.bistatic_distance, "bistatic_distance", label), wavelength);
            rc.cpm = PolarizationMatrix::los();
            rc.add_doppler(r_tx, ctx.v_tx - vl);
            rc.add_doppler(r_rx, ctx.v_rx - vl);
            break;
        case CaseLabel::SNLoS1:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.power_rx, "power_rx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx - vl);
            rc.add_doppler(r_rx, ctx.v_rx);
            rc.add_doppler(need(ctx.cluster_dir_rx, "cluster_dir_rx", label), vl);
            break;
        case CaseLabel::DNLoS1:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.sigma_cluster_rx, "sigma_cluster_rx", label) *
                                 need_nonneg(ctx.power_rx, "power_rx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx - vl);
            rc.add_doppler(r_rx, ctx.v_rx - ctx.v_cluster_rx);
            rc.add_doppler(need(ctx.cluster_dir_rx, "cluster_dir_rx", label), vl - ctx.v_cluster_rx);
            break;
        case CaseLabel::SNLoS2:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.power_tx, "power_tx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx);
            rc.add_doppler(r_rx, ctx.v_rx - vl);
            rc.add_doppler(need(ctx.cluster_dir_tx, "cluster_dir_tx", label), vl);
            break;
        case CaseLabel::DNLoS2:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.sigma_cluster_tx, "sigma_cluster_tx", label) *
                                 need_nonneg(ctx.power_tx, "power_tx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx - ctx.v_cluster_tx);
            rc.add_doppler(r_rx, ctx.v_rx - vl);
            rc.add_doppler(need(ctx.cluster_dir_tx, "cluster_dir_tx", label), vl - ctx.v_cluster_tx);
            break;
        case CaseLabel::SNLoS3:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.power_tx, "power_tx", label) *
                                 need_nonneg(ctx.power_rx, "power_rx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx);
            rc.add_doppler(r_rx, ctx.v_rx);
            rc.add_doppler(need(ctx.cluster_dir_tx, "cluster_dir_tx", label), vl);
            rc.add_doppler(need(ctx.cluster_dir_rx, "cluster_dir_rx", label), vl);
            break;
        case CaseLabel::DNLoS3:
            rc.gamma = std::sqrt(sigma * need_nonneg(ctx.sigma_cluster_tx, "sigma_cluster_tx", label) *
                                 need_nonneg(ctx.sigma_cluster_rx, "sigma_cluster_rx", label) *
                                 need_nonneg(ctx.power_tx, "power_tx", label) *
                                 need_nonneg(ctx.power_rx, "power_rx", label));
            rc.cpm = nlos_cpm();
            rc.add_doppler(r_tx, ctx.v_tx - ctx.v_cluster_tx);
            rc.add_doppler(r_rx, ctx.v_rx - ctx.v_cluster_rx);
            rc.add_doppler(need(ctx.cluster_dir_tx, "cluster_dir_tx", label), vl - ctx.v_cluster_tx);
            rc.add_doppler(need(ctx.cluster_dir_rx, "cluster_dir_rx", label), vl - ctx.v_cluster_rx);
            break;
        default:
            throw ContextError("case " + to_string(label) + " is not a target case");
        }
        return rc;
    }

    static cd polarization_term(const RayCoefficient &rc, const AntennaArray &tx, const AntennaArray &rx)
    {
        const auto ft = tx.pattern.evaluate(rc.tx_angles);
        const auto fr = rx.pattern.evaluate(rc.rx_angles);
        const PolarizationMatrix &c = rc.cpm;
        return fr[0] * (c.tt * ft[0] + c.tp * ft[1]) + fr[1] * (c.pt * ft[0] + c.pp * ft[1]);
    }

    cd coefficient_value(const RayCoefficient &rc, const AntennaArray &tx, std::size_t s, const AntennaArray &rx,
                         std::size_t u, double t, double wavelength)
    {
        if (s >= tx.size() || u >= rx.size())
            throw std::out_of_range("antenna index out of range");
        cd v = rc.gamma * polarization_term(rc, tx, rx);
        v *= spatial_phase(spherical_unit(rc.tx_angles), tx.element_offsets[s], wavelength);
        v *= spatial_phase(spherical_unit(rc.rx_angles), rx.element_offsets[u], wavelength);
        for (int i = 0; i < rc.n_doppler; ++i)
            v *= doppler_phase(rc.doppler[i].direction, rc.doppler[i].velocity, t, wavelength);
        return v;
    }

    cd background_coefficient(CaseLabel label, const BackgroundRayContext &ctx, const AntennaArray &tx, std::size_t s,
                              const AntennaArray &rx, std::size_t u, double t, double wavelength)
    {
        return coefficient_value(resolve_background(label, ctx, wavelength), tx, s, rx, u, t, wavelength);
    }

    cd target_coefficient(CaseLabel label, const TargetRayContext &ctx, const AntennaArray &tx, std::size_t s,
                          const AntennaArray &rx, std::size_t u, double t, double wavelength)
    {
        return coefficient_value(resolve_target(label, ctx, wavelength), tx, s, rx, u, t, wavelength);
    }

    void accumulate_path(const RayCoefficient &rc, const AntennaArray &tx, const AntennaArray &rx,
                         const std::vector<double> &times, double wavelength, cd weight, cd *out)
    {
        const std::size_t nt = tx.size(), nr = rx.size();
        const cd base = weight * rc.gamma * polarization_term(rc, tx, rx);
        const Vec3 dt = spherical_unit(rc.tx_angles), dr = spherical_unit(rc.rx_angles);
        cd st[64], sr[64];
        if (nt > 64 || nr > 64)
            throw std::invalid_argument("arrays above 64 elements are not supported");
        for (std::size_t s = 0; s < nt; ++s)
            st[s] = spatial_phase(dt, tx.element_offsets[s], wavelength);
        for (std::size_t u = 0; u < nr; ++u)
            sr[u] = base * spatial_phase(dr, rx.element_offsets[u], wavelength);
        const double fd = rc.doppler_hz(wavelength);
        for (std::size_t k = 0; k < times.size(); ++k)
        {
            const cd d = fd == 0.0 ? cd(1.0, 0.0) : std::polar(1.0, 2.0 * pi * fd * times[k]);
            cd *o = out + k * nr * nt;
            for (std::size_t u = 0; u < nr; ++u)
            {
                const cd ru = sr[u] * d;
                for (std::size_t s = 0; s < nt; ++s)
                    o[u * nt + s] += ru * st[s];
            }
        }
    }
}
