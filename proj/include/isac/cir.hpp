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

#ifndef ISAC_CIR_H
#define ISAC_CIR_H

#include "isac/coefficients.hpp"
#include "isac/scenario.hpp"
#include "isac/smallscale.hpp"
#include "isac/target.hpp"

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace isac
{
    // Tap set in struct-of-arrays layout; coefficients are [tap][snapshot][u][s]
    struct TapList
    {
        std::size_t n_rx = 1, n_tx = 1, n_snap = 1;
        std::vector<CaseLabel> label;
        std::vector<double> delay; // [tap][u][s], seconds
        std::vector<cd> coeff;

        TapList() = default;
        TapList(std::size_t rx, std::size_t tx, std::size_t snap) : n_rx(rx), n_tx(tx), n_snap(snap) {}

        std::size_t pairs() const { return n_rx * n_tx; }
        std::size_t size() const { return label.size(); }
        bool empty() const { return label.empty(); }

        // Appends a zero-coefficient tap with the same delay on every antenna pair
        std::size_t add(CaseLabel l, double uniform_delay);

        double *delays(std::size_t i) { return delay.data() + i * pairs(); }
        const double *delays(std::size_t i) const { return delay.data() + i * pairs(); }
        cd *coeffs(std::size_t i) { return coeff.data() + i * pairs() * n_snap; }
        const cd *coeffs(std::size_t i) const { return coeff.data() + i * pairs() * n_snap; }

        void scale(double factor);
        void append(const TapList &other);
        double min_delay() const;
        double max_delay() const;
        double energy(std::size_t snapshot = 0) const; // sum of |h|^2 over taps and pairs
    };

    struct RicianWeights
    {
        double gamma = 0.0, gamma_tilde = 1.0;
    };

    // k_linear may be +inf
    RicianWeights rician_weights(double k_linear);

    std::array<double, 4> target_gamma_weights(int target_case, double k1_linear, double k2_linear);

    struct BackgroundContext
    {
        const LinkClusters *clusters = nullptr;
        double distance = 0.0; // Tx-Rx array centers
        double k_linear = 0.0;
        const AntennaArray *tx = nullptr, *rx = nullptr;
        Vec3 v_tx, v_rx;
        std::vector<double> times{0.0};
        double wavelength = 0.0;
    };

    TapList assemble_background(const BackgroundContext &ctx);

    struct StochasticRay
    {
        double delay = 0.0; // absolute
        double power = 0.0; // P_{n,m}
        SphericalAngles departure, arrival;
        double xpr = 1.0;
        PhaseQuad phases{};
    };

    struct TargetContext
    {
        const Target *target = nullptr;
        std::vector<StochasticRay> stochastic_tx, stochastic_rx; // Tx-target and target-Rx rays
        std::vector<DeterministicCluster> deterministic_tx, deterministic_rx;
        const AntennaArray *tx = nullptr, *rx = nullptr;
        Vec3 v_tx, v_rx;
        std::vector<double> times{0.0};
        double wavelength = 0.0;
        double path_threshold_db = -40.0;
        std::uint64_t phase_seed = 0; // stream for per-path cascade phases
    };

    // Largest |Gamma|^2 over all candidate target paths, used by the post-concatenation threshold
    double max_target_path_power(const TargetContext &ctx);

    // One NLoS component of the target channel, xi in {1, 2, 3}; paths below floor_power are dropped
    TapList assemble_target_nlos(int xi, const TargetContext &ctx, double weight, double floor_power);

    TapList assemble_target_los(const TargetContext &ctx, double weight);

    TapList assemble_target(int target_case, const TargetContext &ctx, double k1_linear, double k2_linear);

    struct RealizationMeta
    {
        std::uint64_t seed = 0, drop = 0;
        std::string scenario;
        Condition background_condition = Condition::LoS;
        std::vector<Condition> tx_target_condition, target_rx_condition;
        std::vector<int> target_case;
        RicianWeights background_weights;
        std::vector<std::array<double, 4>> target_weights;
        std::vector<double> bistatic_delay; // per target, array centers
        std::vector<double> target_gain;    // amplitude scale applied to each target's taps
        std::vector<std::string> warnings;
    };

    struct ChannelRealization
    {
        std::vector<double> times;
        std::size_t n_rx = 1, n_tx = 1;
        TapList background, target;
        RealizationMeta meta;
    };

    ChannelRealization combine_isac(const TapList &background, const TapList &target, const std::vector<double> &times);

    enum class DiscretizationFilter
    {
        nearest_bin,
        sinc_windowed
    };

    DiscretizationFilter parse_filter(const std::string &s);

    struct DiscreteCir
    {
        std::size_t n_snap = 0, n_rx = 0, n_tx = 0, n_bins = 0;
        double t0 = 0.0;       // delay of bin 0
        std::vector<cd> h;     // [snap][u][s][bin]
        cd &at(std::size_t k, std::size_t u, std::size_t s, std::size_t b) { return h[((k * n_rx + u) * n_tx + s) * n_bins + b]; }
        const cd &at(std::size_t k, std::size_t u, std::size_t s, std::size_t b) const { return h[((k * n_rx + u) * n_tx + s) * n_bins + b]; }
        double energy() const;
    };

    // Bin b holds delay t0 + b / fs; taps outside the window are dropped
    DiscreteCir discretize(const TapList &taps, double sample_rate_hz, DiscretizationFilter filter,
                           std::size_t n_bins, double t0 = 0.0);

    // Frequency response on the FFT subcarrier grid f_k = k fs / n for k < n/2 and (k - n) fs / n otherwise.
    // Delays are snapped to a grid of 1 / (oversampling fs). Layout [snap][k][u][s].
    std::vector<cd> frequency_response(const TapList &taps, double sample_rate_hz, std::size_t n_subcarriers,
                                       std::size_t oversampling = 16);

    void write_taps_csv(std::ostream &os, const TapList &taps, const std::vector<double> &times);
}

#endif
