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


#ifndef ISAC_EVAL_H
#define ISAC_EVAL_H

#include "isac/cir.hpp"
#include "isac/config.hpp"
#include "isac/random.hpp"

#include <cstdint>
#include <vector>

namespace isac
{
    struct OfdmConfig
    {
        std::size_t n_subcarriers = 256;
        std::size_t cp_length = 32;
        double carrier_hz = 7e9;
        double sample_rate_hz = 30.72e6;
        std::size_t oversampling = 16;

        static OfdmConfig from(const WaveformConfig &w);
        double subcarrier_spacing() const { return sample_rate_hz / double(n_subcarriers); }
        double cp_duration() const { return double(cp_length) / sample_rate_hz; }
    };

    // Frequency-domain channel of one snapshot, [k][u][s]
    struct FrequencyChannel
    {
        std::size_t n_sc = 0, n_rx = 0, n_tx = 0;
        std::vector<cd> h;

        const cd *at(std::size_t k) const { return h.data() + k * n_rx * n_tx; }
        double mean_power() const; // mean |h|^2 per entry
    };

    FrequencyChannel to_frequency(const TapList &taps, const OfdmConfig &ofdm, std::size_t snapshot = 0);
    FrequencyChannel operator+(const FrequencyChannel &a, const FrequencyChannel &b);

    // True when the tap delay span exceeds the cyclic prefix
    bool exceeds_cp(const TapList &taps, const OfdmConfig &ofdm);

    // Unit-energy Gray-mapped 4-QAM
    cd qpsk_symbol(int b0, int b1);

    // Q(sqrt(2 Eb/N0))
    double qpsk_ber_awgn(double ebn0_db);

    struct BerPoint
    {
        double snr_db = 0.0;
        std::uint64_t bits = 0, errors = 0;
        double ber() const { return bits ? double(errors) / double(bits) : 0.0; }
    };

    // ZF detection over all subcarriers for each SNR; n_symbols OFDM symbols per SNR point.
    // SNR is per receive antenna relative to the average received signal power, transmit power split
    // equally over the streams. Symbol and noise draws come from the given generators.
    void ber_drop(const FrequencyChannel &ch, const std::vector<double> &snr_db, std::size_t n_symbols,
                  std::uint64_t seed, std::uint64_t drop, std::vector<BerPoint> &acc);

    std::vector<BerPoint> simulate_ber(const std::vector<FrequencyChannel> &channels, const std::vector<double> &snr_db,
                                       std::size_t n_symbols, std::uint64_t seed);

    // SNR (dB) where the BER curve crosses 'target' by log-linear interpolation; NaN if it never does
    double snr_at_ber(const std::vector<BerPoint> &curve, double target);

    // Mean over subcarriers of log2 det(I + H H^H / noise_var)
    double ergodic_capacity(const FrequencyChannel &ch, double noise_variance = 1.0);

    struct RangeEstimate
    {
        double range_m = 0.0;
        double truth_m = 0.0;
        double error_m = 0.0;
        bool outage = false;
    };

    // Bistatic path length of the strongest target tap, averaged over antenna pairs
    double strongest_path_range(const TapList &target);

    // Delay-peak estimate on the background-subtracted LS channel estimate. The estimation noise per
    // entry is the mean target-echo power divided by the SNR; 'unit_noise' holds 2 * n_sc * pairs
    // standard normals so that all SNR points share one noise realization.
    RangeEstimate estimate_range(const FrequencyChannel &isac, const FrequencyChannel &background, double echo_power,
                                 const OfdmConfig &ofdm, double snr_db, const std::vector<double> &unit_noise,
                                 std::size_t ifft_size, double baseline_m, double truth_m);

    // Delay-domain response per pair, bins of width 1/fs: g[b][pair]
    std::vector<cd> delay_response(const FrequencyChannel &ch, std::size_t ifft_size);

    struct Gate
    {
        std::size_t first = 0, count = 1;
    };

    Gate sensing_gate(double bistatic_delay, double max_target_delay, double bin_width, int lead, int tail,
                      int max_bins, std::size_t n_bins);

    // Energy over the gate with complex noise of variance noise_var per bin and pair
    double gate_energy(const std::vector<cd> &response, std::size_t n_pairs, const Gate &gate, double amplitude,
                       double noise_var, Rng &rng);

    struct RocPoint
    {
        double threshold = 0.0;
        double p_fa = 0.0, p_d = 0.0;
    };

    // Empirical ROC from detector statistics under both hypotheses; P_d is made non-decreasing in P_fa
    std::vector<RocPoint> roc_curve(const std::vector<double> &h0, const std::vector<double> &h1,
                                    std::size_t n_thresholds);

    // P_d interpolated at a given P_fa and P_fa at a given P_d
    double pd_at(const std::vector<RocPoint> &roc, double p_fa);
    double pfa_at(const std::vector<RocPoint> &roc, double p_d);
    double roc_auc(const std::vector<RocPoint> &roc);

    // Pool-adjacent-violators fit, non-decreasing
    std::vector<double> isotonic_increasing(const std::vector<double> &y);
}

#endif
