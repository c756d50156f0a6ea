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

#include "isac/eval.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac
{
    using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    OfdmConfig OfdmConfig::from(const WaveformConfig &w)
    {
        OfdmConfig o;
        o.n_subcarriers = std::size_t(w.n_subcarriers);
        o.cp_length = std::size_t(w.cp_length);
        o.carrier_hz = w.carrier_hz;
        o.sample_rate_hz = w.sample_rate_hz;
        o.oversampling = std::size_t(w.oversampling);
        return o;
    }

    double FrequencyChannel::mean_power() const
    {
        if (h.empty())
            return 0.0;
        double e = 0.0;
        for (const auto &v : h)
            e += std::norm(v);
        return e / double(h.size());
    }

    FrequencyChannel to_frequency(const TapList &taps, const OfdmConfig &ofdm, std::size_t snapshot)
    {
        FrequencyChannel f;
        f.n_sc = ofdm.n_subcarriers;
        f.n_rx = taps.n_rx;
        f.n_tx = taps.n_tx;
        const std::size_t block = f.n_sc * taps.pairs();
        if (taps.empty())
        {
            f.h.assign(block, cd(0.0, 0.0));
            return f;
        }
        if (snapshot >= taps.n_snap)
            throw std::out_of_range("to_frequency: snapshot out of range");
        const auto all = frequency_response(taps, ofdm.sample_rate_hz, ofdm.n_subcarriers, ofdm.oversampling);
        f.h.assign(all.begin() + std::ptrdiff_t(snapshot * block), all.begin() + std::ptrdiff_t((snapshot + 1) * block));
        return f;
    }

    FrequencyChannel operator+(const FrequencyChannel &a, const FrequencyChannel &b)
    {
        if (a.n_sc != b.n_sc || a.n_rx != b.n_rx || a.n_tx != b.n_tx)
            throw std::invalid_argument("FrequencyChannel: shape mismatch");
        FrequencyChannel r = a;
        for (std::size_t i = 0; i < r.h.size(); ++i)
            r.h[i] += b.h[i];
        return r;
    }

    bool exceeds_cp(const TapList &taps, const OfdmConfig &ofdm)
    {
        if (taps.empty())
            return false;
        return taps.max_delay() - taps.min_delay() > ofdm.cp_duration();
    }

    cd qpsk_symbol(int b0, int b1)
    {
        const double a = 1.0 / std::sqrt(2.0);
        return {b0 ? -a : a, b1 ? -a : a};
    }

    double qpsk_ber_awgn(double ebn0_db)
    {
        return 0.5 * std::erfc(std::sqrt(std::pow(10.0, ebn0_db / 10.0)));
    }

    void ber_drop(const FrequencyChannel &ch, const std::vector<double> &snr_db, std::size_t n_symbols,
                  std::uint64_t seed, std::uint64_t drop, std::vector<BerPoint> &acc)
    {
        const std::size_t nr = ch.n_rx, nt = ch.n_tx, n = ch.n_sc;
        if (acc.size() != snr_db.size())
        {
            acc.assign(snr_db.size(), BerPoint{});
            for (std::size_t i = 0; i < snr_db.size(); ++i)
                acc[i].snr_db = snr_db[i];
        }

        std::vector<CMatrix> w(n);
        for (std::size_t k = 0; k < n; ++k)
        {
            const Eigen::Map<const CMatrix> hk(ch.at(k), Eigen::Index(nr), Eigen::Index(nt));
            w[k] = hk.completeOrthogonalDecomposition().pseudoInverse();
        }

        const double tx_amp = 1.0 / std::sqrt(double(nt));
        Eigen::VectorXcd x(nt), y(nr), xh(nt);
        std::vector<int> bits(2 * nt);
        for (std::size_t i = 0; i < snr_db.size(); ++i)
        {
            Rng sym = make_stream(seed, drop, Stream::symbols, i);
            Rng noise = make_stream(seed, drop, Stream::noise, i);
            const double sd = std::sqrt(0.5 * std::pow(10.0, -snr_db[i] / 10.0));
            std::uint64_t errors = 0, count = 0;
            for (std::size_t q = 0; q < n_symbols; ++q)
                for (std::size_t k = 0; k < n; ++k)
                {
                    const Eigen::Map<const CMatrix> hk(ch.at(k), Eigen::Index(nr), Eigen::Index(nt));
                    const std::uint64_t word = sym();
                    for (std::size_t s = 0; s < nt; ++s)
                    {
                        bits[2 * s] = int((word >> (2 * s)) & 1u);
                        bits[2 * s + 1] = int((word >> (2 * s + 1)) & 1u);
                        x(Eigen::Index(s)) = qpsk_symbol(bits[2 * s], bits[2 * s + 1]) * tx_amp;
                    }
                    y = hk * x;
                    for (std::size_t u = 0; u < nr; ++u)
                    {
                        const double re = standard_normal(noise);
                        const double im = standard_normal(noise);
                        y(Eigen::Index(u)) += cd(re * sd, im * sd);
                    }
                    xh = w[k] * y;
                    for (std::size_t s = 0; s < nt; ++s)
                    {
                        errors += int(xh(Eigen::Index(s)).real() < 0.0) != bits[2 * s];
                        errors += int(xh(Eigen::Index(s)).imag() < 0.0) != bits[2 * s + 1];
                    }
                    count += 2 * nt;
                }
            acc[i].bits += count;
            acc[i].errors += errors;
        }
    }

    std::vector<BerPoint> simulate_ber(const std::vector<FrequencyChannel> &channels, const std::vector<double> &snr_db,
                                       std::size_t n_symbols, std::uint64_t seed)
    {
        std::vector<BerPoint> acc;
        for (std::size_t d = 0; d < channels.size(); ++d)
            ber_drop(channels[d], snr_db, n_symbols, seed, d, acc);
        if (acc.empty())
            for (double s : snr_db)
                acc.push_back({s, 0, 0});
        return acc;
    }

    double snr_at_ber(const std::vector<BerPoint> &c, double target)
    {
        auto lg = [](const BerPoint &p)
        {
            const double floor = p.bits ? 0.5 / double(p.bits) : 1e-12;
            return std::log10(std::max(p.ber(), floor));
        };
        const double lt = std::log10(target);
        for (std::size_t i = 1; i < c.size(); ++i)
        {
            const double a = lg(c[i - 1]), b = lg(c[i]);
            if (a > lt && b <= lt)
                return c[i - 1].snr_db + (lt - a) / (b - a) * (c[i].snr_db - c[i - 1].snr_db);
        }
        if (!c.empty() && lg(c.front()) <= lt)
            return c.front().snr_db;
        return std::numeric_limits<double>::quiet_NaN();
    }

    double ergodic_capacity(const FrequencyChannel &ch, double noise_variance)
    {
        if (!(noise_variance > 0.0))
            throw std::invalid_argument("ergodic_capacity: noise variance must be positive");
        const Eigen::Index nr = Eigen::Index(ch.n_rx), nt = Eigen::Index(ch.n_tx);
        double sum = 0.0;
        for (std::size_t k = 0; k < ch.n_sc; ++k)
        {
            const Eigen::Map<const CMatrix> hk(ch.at(k), nr, nt);
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nr, nr) + hk * hk.adjoint() / noise_variance;
            Eigen::LLT<Eigen::MatrixXcd> llt(m);
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < nr; ++i)
                logdet += 2.0 * std::log(llt.matrixL()(i, i).real());
            sum += logdet / std::log(2.0);
        }
        return ch.n_sc ? sum / double(ch.n_sc) : 0.0;
    }

    double strongest_path_range(const TapList &t)
    {
        if (t.empty())
            throw std::invalid_argument("strongest_path_range: no target taps");
        std::size_t best = 0;
        double best_e = -1.0;
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            double e = 0.0;
            const cd *c = t.coeffs(i);
            for (std::size_t p = 0; p < t.pairs(); ++p)
                e += std::norm(c[p]);
            if (e > best_e)
            {
                best_e = e;
                best = i;
            }
        }
        double d = 0.0;
        const double *dl = t.delays(best);
        for (std::size_t p = 0; p < t.pairs(); ++p)
            d += dl[p];
        return d / double(t.pairs()) * speed_of_light;
    }

    std::vector<cd> delay_response(const FrequencyChannel &ch, std::size_t nfft)
    {
        const std::size_t n = ch.n_sc, np = ch.n_rx * ch.n_tx;
        if (nfft < n)
            throw std::invalid_argument("delay_response: IFFT shorter than the subcarrier count");
        std::vector<cd> out(nfft * np);
        std::vector<cd> spec(nfft), time(nfft);
        Eigen::FFT<double> fft;
        for (std::size_t p = 0; p < np; ++p)
        {
            std::fill(spec.begin(), spec.end(), cd(0.0, 0.0));
            for (std::size_t k = 0; k < n; ++k)
            {
                const std::size_t idx = k < n / 2 ? k : nfft - (n - k);
                spec[idx] = ch.h[k * np + p];
            }
            fft.inv(time, spec);
            const double scale = double(nfft) / double(n);
            for (std::size_t b = 0; b < nfft; ++b)
                out[b * np + p] = time[b] * scale;
        }
        return out;
    }

    RangeEstimate estimate_range(const FrequencyChannel &isac, const FrequencyChannel &background, double echo_power,
                                 const OfdmConfig &ofdm, double snr_db, const std::vector<double> &unit_noise,
                                 std::size_t nfft, double baseline_m, double truth_m)
    {
        const std::size_t np = isac.n_rx * isac.n_tx, n = isac.n_sc;
        if (unit_noise.size() < 2 * isac.h.size())
            throw std::invalid_argument("estimate_range: not enough noise samples");
        const double n0 = echo_power * std::pow(10.0, -snr_db / 10.0);
        const double sd = std::sqrt(0.5 * n0);

        FrequencyChannel d = isac;
        for (std::size_t i = 0; i < d.h.size(); ++i)
            d.h[i] += -background.h[i] + cd(unit_noise[2 * i] * sd, unit_noise[2 * i + 1] * sd);

        const auto g = delay_response(d, nfft);
        std::vector<double> pdp(nfft, 0.0);
        for (std::size_t b = 0; b < nfft; ++b)
            for (std::size_t p = 0; p < np; ++p)
                pdp[b] += std::norm(g[b * np + p]);

        const double bin = double(n) / (ofdm.sample_rate_hz * double(nfft));
        const std::size_t first = std::min(nfft - 1, std::size_t(std::floor(baseline_m / speed_of_light / bin)));
        std::size_t peak = first;
        for (std::size_t b = first; b < nfft; ++b)
            if (pdp[b] > pdp[peak])
                peak = b;
        const double l = pdp[(peak + nfft - 1) % nfft], c = pdp[peak], r = pdp[(peak + 1) % nfft];
        const double den = l - 2.0 * c + r;
        const double delta = den < 0.0 ? std::clamp(0.5 * (l - r) / den, -0.5, 0.5) : 0.0;

        RangeEstimate est;
        est.range_m = std::max(baseline_m, (double(peak) + delta) * bin * speed_of_light);
        est.truth_m = truth_m;
        est.error_m = std::abs(est.range_m - truth_m);
        const double noise_level = double(np) * n0 / double(n);
        est.outage = c < 3.0 * noise_level;
        return est;
    }

    Gate sensing_gate(double bistatic_delay, double max_delay, double bw, int lead, int tail, int max_bins,
                      std::size_t n_bins)
    {
        const long long lo = std::max(0LL, (long long)std::floor(bistatic_delay / bw) - lead);
        const long long hi = std::min((long long)n_bins - 1, (long long)std::ceil(max_delay / bw) + tail);
        Gate g;
        g.first = std::size_t(std::min(lo, (long long)n_bins - 1));
        g.count = std::size_t(std::clamp(hi - lo + 1, 1LL, (long long)max_bins));
        g.count = std::min(g.count, n_bins - g.first);
        return g;
    }

    double gate_energy(const std::vector<cd> &g, std::size_t np, const Gate &gate, double amplitude, double noise_var,
                       Rng &rng)
    {
        const double sd = std::sqrt(0.5 * noise_var);
        double e = 0.0;
        for (std::size_t b = gate.first; b < gate.first + gate.count; ++b)
            for (std::size_t p = 0; p < np; ++p)
            {
                const double re = standard_normal(rng), im = standard_normal(rng);
                const cd s = (g.empty() ? cd(0.0, 0.0) : g[b * np + p] * amplitude) + cd(re * sd, im * sd);
                e += std::norm(s);
            }
        return e;
    }

    std::vector<double> isotonic_increasing(const std::vector<double> &y)
    {
        std::vector<double> val;
        std::vector<std::size_t> len;
        for (double v : y)
        {
            val.push_back(v);
            len.push_back(1);
            while (val.size() > 1 && val[val.size() - 2] > val.back())
            {
                const std::size_t n = val.size();
                const double merged = (val[n - 2] * double(len[n - 2]) + val[n - 1] * double(len[n - 1])) /
                                      double(len[n - 2] + len[n - 1]);
                len[n - 2] += len[n - 1];
                val[n - 2] = merged;
                val.pop_back();
                len.pop_back();
            }
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < val.size(); ++i)
            out.insert(out.end(), len[i], val[i]);
        return out;
    }

    std::vector<RocPoint> roc_curve(const std::vector<double> &h0, const std::vector<double> &h1, std::size_t n_thr)
    {
        if (h0.empty() || h1.empty() || n_thr < 2)
            throw std::invalid_argument("roc_curve: empty ensemble or too few thresholds");
        std::vector<double> s0 = h0, s1 = h1, pool = h0;
        pool.insert(pool.end(), h1.begin(), h1.end());
        std::sort(s0.begin(), s0.end());
        std::sort(s1.begin(), s1.end());
        std::sort(pool.begin(), pool.end());

        std::vector<double> thr{-std::numeric_limits<double>::infinity()};
        for (std::size_t i = 0; i < n_thr; ++i)
            thr.push_back(pool[i * (pool.size() - 1) / (n_thr - 1)]);
        thr.push_back(std::numeric_limits<double>::infinity());

        auto above = [](const std::vector<double> &s, double t)
        {
            return double(s.end() - std::upper_bound(s.begin(), s.end(), t)) / double(s.size());
        };
        std::vector<RocPoint> pts;
        for (auto it = thr.rbegin(); it != thr.rend(); ++it)
            pts.push_back({*it, above(s0, *it), above(s1, *it)});
        std::stable_sort(pts.begin(), pts.end(), [](const RocPoint &a, const RocPoint &b)
                         { return a.p_fa < b.p_fa; });
        std::vector<double> pd;
        for (const auto &p : pts)
            pd.push_back(p.p_d);
        pd = isotonic_increasing(pd);
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i].p_d = pd[i];
        return pts;
    }

    double pd_at(const std::vector<RocPoint> &roc, double pfa)
    {
        if (roc.empty())
            return 0.0;
        if (pfa <= roc.front().p_fa)
            return roc.front().p_d;
        for (std::size_t i = 1; i < roc.size(); ++i)
            if (roc[i].p_fa >= pfa)
            {
                const double w = roc[i].p_fa - roc[i - 1].p_fa;
                if (w <= 0.0)
                    return roc[i].p_d;
                return roc[i - 1].p_d + (pfa - roc[i - 1].p_fa) / w * (roc[i].p_d - roc[i - 1].p_d);
            }
        return roc.back().p_d;
    }

    double pfa_at(const std::vector<RocPoint> &roc, double pd)
    {
        if (roc.empty())
            return 1.0;
        if (roc.front().p_d >= pd)
            return roc.front().p_fa;
        for (std::size_t i = 1; i < roc.size(); ++i)
            if (roc[i].p_d >= pd)
            {
                const double h = roc[i].p_d - roc[i - 1].p_d;
                if (h <= 0.0)
                    return roc[i].p_fa;
                return roc[i - 1].p_fa + (pd - roc[i - 1].p_d) / h * (roc[i].p_fa - roc[i - 1].p_fa);
            }
        return 1.0;
    }

    double roc_auc(const std::vector<RocPoint> &roc)
    {
        double a = 0.0;
        for (std::size_t i = 1; i < roc.size(); ++i)
            a += 0.5 * (roc[i].p_d + roc[i - 1].p_d) * (roc[i].p_fa - roc[i - 1].p_fa);
        return a;
    }
}
