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

#include "photonlink/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "analysis_detail.hpp"

namespace photonlink
{

namespace
{

Picoseconds positive_mod(Picoseconds a, Picoseconds b)
{
    const Picoseconds r = a % b;
    return r < 0 ? r + b : r;
}

Picoseconds floor_div(Picoseconds a, Picoseconds b) { return (a - positive_mod(a, b)) / b; }

} // namespace

ExpectedArrivals::ExpectedArrivals(ProtocolSchedule schedule, RangeProfile range)
    : schedule_(schedule), range_(std::move(range)), pulse_period_(schedule.pulse_period_ps())
{
    schedule_.validate();
}

Picoseconds ExpectedArrivals::arrival(std::int64_t slot) const
{
    const Picoseconds emit = slot * pulse_period_;
    return emit + round_trip_ps(range_.range_at(static_cast<double>(emit) * 1e-12));
}

std::optional<Picoseconds> ExpectedArrivals::nearest(Picoseconds t) const
{
    if (!schedule_.rx_open_at(t))
        return std::nullopt;
    // emission time solving t = e + rtt(e); the range changes slowly, two steps suffice
    Picoseconds emit = t - round_trip_ps(range_.range_at(static_cast<double>(t) * 1e-12));
    emit = t - round_trip_ps(range_.range_at(static_cast<double>(emit) * 1e-12));
    const std::int64_t guess = floor_div(emit + pulse_period_ / 2, pulse_period_);

    std::optional<Picoseconds> best;
    Picoseconds best_gap = std::numeric_limits<Picoseconds>::max();
    for (std::int64_t k = guess - 1; k <= guess + 1; ++k)
    {
        if (!schedule_.is_tx_slot(k))
            continue;
        const Picoseconds a = arrival(k);
        const Picoseconds gap = std::abs(t - a);
        if (gap < best_gap)
        {
            best_gap = gap;
            best = a;
        }
    }
    if (!best || 2 * best_gap > pulse_period_)
        return std::nullopt;
    return best;
}

Picoseconds wrap_residual(Picoseconds x, Picoseconds period)
{
    const Picoseconds half = period / 2;
    return half - positive_mod(half - x, period);
}

ResidualSet residuals(std::span<const TagEvent> tags, const ExpectedArrivals& refs, int channel)
{
    ResidualSet out;
    out.channel = channel;
    out.pulse_period = refs.pulse_period();

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i].channel == channel)
            idx.push_back(i);

    std::vector<std::optional<Residual>> tmp(idx.size());
    const auto n = static_cast<std::ptrdiff_t>(idx.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j)
    {
        const TagEvent& e = tags[idx[static_cast<std::size_t>(j)]];
        if (const auto ref = refs.nearest(e.time))
            tmp[static_cast<std::size_t>(j)] = Residual{e.time, wrap_residual(e.time - *ref, out.pulse_period), e.truth};
    }
    out.items.reserve(idx.size());
    for (const auto& r : tmp)
        if (r)
            out.items.push_back(*r);
    return out;
}

ResidualSet residuals(std::span<const TagEvent> tags, std::span<const Picoseconds> refs, Picoseconds pulse_period,
                      int channel)
{
    if (pulse_period <= 0)
        throw std::invalid_argument("pulse period must be positive");
    ResidualSet out;
    out.channel = channel;
    out.pulse_period = pulse_period;
    if (refs.empty())
        return out;
    for (const auto& e : tags)
    {
        if (e.channel != channel)
            continue;
        auto it = std::lower_bound(refs.begin(), refs.end(), e.time);
        Picoseconds ref;
        if (it == refs.end())
            ref = refs.back();
        else if (it == refs.begin())
            ref = *it;
        else
            ref = (*it - e.time) < (e.time - *(it - 1)) ? *it : *(it - 1);
        out.items.push_back({e.time, wrap_residual(e.time - ref, pulse_period), e.truth});
    }
    return out;
}

WindowCounts windowed_counts(std::span<const Residual> rs, Picoseconds pulse_period, double window_ps,
                             double exclusion_ps)
{
    const double P = static_cast<double>(pulse_period);
    if (!(window_ps > 0.0) || !(window_ps < 2.0 * exclusion_ps) || !(exclusion_ps < 0.5 * P))
        throw std::invalid_argument("window geometry requires 0 < w < 2 exclusion and exclusion < P/2");
    WindowCounts c;
    const double half = 0.5 * window_ps;
    for (const auto& r : rs)
    {
        const double a = std::abs(static_cast<double>(r.residual));
        if (a <= half)
            ++c.total_in_window;
        else if (a > exclusion_ps)
            ++c.outside;
    }
    c.scale = window_ps / (P - 2.0 * exclusion_ps);
    c.background_in_window = static_cast<double>(c.outside) * c.scale;
    return c;
}

namespace detail
{

void validate_interval_inputs(const ResidualSet& rs, double duration_s, const AnalysisParams& params)
{
    params.validate(static_cast<double>(rs.pulse_period));
    if (!(duration_s >= 0.0))
        throw std::invalid_argument("duration must be non-negative");
}

std::size_t interval_count(double duration_s, double interval_s)
{
    return static_cast<std::size_t>(std::floor(duration_s / interval_s + 1e-9));
}

IntervalStats make_interval(std::int64_t k, std::int64_t n_tot, std::int64_t n_out, std::int64_t n_sig,
                            double scale, const AnalysisParams& p)
{
    IntervalStats s;
    s.k = k;
    s.tau_s = p.interval_s;
    s.n_tot_w = n_tot;
    s.n_bkg_w = static_cast<double>(n_out) * scale;
    s.n_det = static_cast<double>(n_tot) - s.n_bkg_w;
    const double live = p.interval_s * p.duty_cycle;
    s.live_s = live;
    s.r_det_hz = s.n_det / live;
    s.bkg_rate_w_hz = s.n_bkg_w / live;
    if (s.n_bkg_w > 0.0)
        s.snr = s.n_det / s.n_bkg_w;
    else
        s.snr = s.n_det > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    s.var_n_det = static_cast<double>(n_tot) + scale * scale * static_cast<double>(n_out);
    s.var_n_bkg = scale * scale * static_cast<double>(n_out);
    s.n_signal_truth_w = n_sig;
    return s;
}

} // namespace detail

std::vector<IntervalStats> interval_stats(const ResidualSet& rs, double duration_s, const AnalysisParams& params)
{
    detail::validate_interval_inputs(rs, duration_s, params);
    const std::size_t n = detail::interval_count(duration_s, params.interval_s);
    const auto tau = static_cast<Picoseconds>(std::llround(params.interval_s * 1e12));
    const double half = 0.5 * params.window_ps;
    const double scale = params.window_ps / (static_cast<double>(rs.pulse_period) - 2.0 * params.exclusion_ps);

    std::vector<Residual> sorted;
    std::span<const Residual> items = rs.items;
    const auto by_time = [](const Residual& a, const Residual& b) { return a.time < b.time; };
    if (!std::is_sorted(items.begin(), items.end(), by_time))
    {
        sorted.assign(items.begin(), items.end());
        std::stable_sort(sorted.begin(), sorted.end(), by_time);
        items = sorted;
    }

    std::vector<IntervalStats> out(n);
    const auto n_int = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n_int; ++k)
    {
        const Picoseconds t0 = k * tau;
        const auto lo = std::lower_bound(items.begin(), items.end(), t0,
                                         [](const Residual& r, Picoseconds t) { return r.time < t; });
        const auto hi = std::lower_bound(lo, items.end(), t0 + tau,
                                         [](const Residual& r, Picoseconds t) { return r.time < t; });
        std::int64_t n_tot = 0, n_out = 0, n_sig = 0;
        for (auto it = lo; it != hi; ++it)
        {
            const double a = std::abs(static_cast<double>(it->residual));
            if (a <= half)
            {
                ++n_tot;
                n_sig += it->truth == Truth::signal;
            }
            else if (a > params.exclusion_ps)
                ++n_out;
        }
        out[static_cast<std::size_t>(k)] = detail::make_interval(k, n_tot, n_out, n_sig, scale, params);
    }
    return out;
}

std::vector<IntervalStats> filter_intervals(std::span<IntervalStats> stats, double threshold_hz)
{
    std::vector<IntervalStats> kept;
    for (auto& s : stats)
    {
        s.selected = s.r_det_hz >= threshold_hz;
        if (s.selected)
            kept.push_back(s);
    }
    return kept;
}

std::int64_t Histogram::total() const
{
    std::int64_t t = 0;
    for (auto c : counts)
        t += c;
    return t;
}

TemporalProfile Histogram::as_profile() const
{
    TemporalProfile p;
    p.bin_width_ps = bin_width_ps;
    p.origin_ps = first_edge_ps;
    p.densities.assign(counts.begin(), counts.end());
    return p;
}

Histogram residual_histogram(const ResidualSet& rs, double bin_width_ps, std::span<const IntervalStats> intervals,
                             double interval_s)
{
    if (!(bin_width_ps > 0.0))
        throw std::invalid_argument("histogram bin width must be positive");
    Histogram h;
    h.bin_width_ps = bin_width_ps;
    const double half = 0.5 * static_cast<double>(rs.pulse_period);
    const double nb_half = std::ceil(half / bin_width_ps);
    h.first_edge_ps = -nb_half * bin_width_ps;
    h.counts.assign(static_cast<std::size_t>(2.0 * nb_half), 0);

    std::unordered_set<std::int64_t> keep;
    Picoseconds tau = 0;
    if (!intervals.empty())
    {
        if (!(interval_s > 0.0))
            throw std::invalid_argument("interval length required when filtering by interval");
        tau = static_cast<Picoseconds>(std::llround(interval_s * 1e12));
        for (const auto& s : intervals)
            if (s.selected)
                keep.insert(s.k);
    }
    const auto last = static_cast<std::int64_t>(h.counts.size()) - 1;
    for (const auto& r : rs.items)
    {
        if (tau > 0 && !keep.contains(r.time / tau))
            continue;
        auto i = static_cast<std::int64_t>(std::floor((static_cast<double>(r.residual) - h.first_edge_ps) / bin_width_ps));
        ++h.counts[static_cast<std::size_t>(std::clamp<std::int64_t>(i, 0, last))];
    }
    return h;
}

PassSummary estimate_pass_summary(std::span<const IntervalStats> selected, const LinkBudget& budget,
                                  double rep_rate_hz, std::size_t intervals_total)
{
    PassSummary s;
    s.intervals_total = std::max(intervals_total, selected.size());
    s.intervals_selected = selected.size();
    if (selected.empty())
        return s;
    s.no_signal = false;

    double r_sum = 0.0, var_sum = 0.0, tot = 0.0, bkg = 0.0, var_bkg = 0.0, det = 0.0;
    for (const auto& i : selected)
    {
        r_sum += i.r_det_hz;
        var_sum += i.var_n_det / (i.live_s * i.live_s);
        tot += static_cast<double>(i.n_tot_w);
        det += i.n_det;
        bkg += i.n_bkg_w;
        var_bkg += i.var_n_bkg;
    }
    const double n = static_cast<double>(selected.size());
    s.r_det_hz = r_sum / n;
    s.r_det_sigma_hz = std::sqrt(var_sum) / n;
    if (bkg > 0.0)
    {
        s.snr = det / bkg;
        // snr = tot / bkg - 1 with independent tot and bkg
        s.snr_sigma = std::sqrt(tot / (bkg * bkg) + tot * tot * var_bkg / std::pow(bkg, 4));
    }
    else
        s.snr = det > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    s.mu_sat = estimate_mu_sat(s.r_det_hz, rep_rate_hz, budget.t_down, budget.t_rx);
    s.mu_sat_sigma = estimate_mu_sat(s.r_det_sigma_hz, rep_rate_hz, budget.t_down, budget.t_rx);
    return s;
}

PeriodOccupancy period_occupancy(std::span<const TagEvent> tags, const ProtocolSchedule& schedule, Picoseconds rtt,
                                 double duration_s, double bin_width_ms, std::optional<int> channel)
{
    schedule.validate();
    if (!(bin_width_ms > 0.0))
        throw std::invalid_argument("occupancy bin width must be positive");
    PeriodOccupancy occ;
    occ.bin_width_ms = bin_width_ms;
    occ.periods = duration_s / (schedule.period_ms * 1e-3);
    const auto bins = static_cast<std::size_t>(std::ceil(schedule.period_ms / bin_width_ms));
    occ.closed_hz.assign(bins, 0.0);
    occ.signal_region_hz.assign(bins, 0.0);
    occ.open_other_hz.assign(bins, 0.0);
    if (tags.empty() || !(occ.periods > 0.0))
        return occ;

    const SignalRegion region = signal_region(schedule, rtt);
    const auto bin_ps = static_cast<double>(bin_width_ms) * 1e9;
    for (const auto& e : tags)
    {
        if (channel && e.channel != *channel)
            continue;
        const Picoseconds ph = schedule.phase(e.time);
        const auto b = std::min(bins - 1, static_cast<std::size_t>(static_cast<double>(ph) / bin_ps));
        if (!schedule.rx_open_at(e.time))
            occ.closed_hz[b] += 1.0;
        else if (ph >= region.begin && ph < region.end)
            occ.signal_region_hz[b] += 1.0;
        else
            occ.open_other_hz[b] += 1.0;
    }
    const double norm = 1.0 / (occ.periods * bin_width_ms * 1e-3);
    for (std::size_t b = 0; b < bins; ++b)
    {
        occ.closed_hz[b] *= norm;
        occ.signal_region_hz[b] *= norm;
        occ.open_other_hz[b] *= norm;
    }
    return occ;
}

ChannelAnalysis analyze_channel(std::span<const TagEvent> tags, const Scenario& scenario, int channel,
                                double duration_s)
{
    const std::size_t rx = scenario.receiver_index(channel);
    ChannelAnalysis a;
    a.channel = channel;
    const ExpectedArrivals refs(scenario.schedule, scenario.range);
    a.residuals = residuals(tags, refs, channel);
    a.intervals = interval_stats(a.residuals, duration_s, scenario.analysis);
    const auto kept = filter_intervals(a.intervals, scenario.analysis.threshold_hz);
    a.histogram = residual_histogram(a.residuals, scenario.analysis.bin_width_ps, a.intervals,
                                     scenario.analysis.interval_s);
    const LinkBudget budget = scenario.budget(rx, scenario.mean_range_m(duration_s));
    a.summary = estimate_pass_summary(kept, budget, scenario.rep_rate_hz, a.intervals.size());
    return a;
}

} // namespace photonlink
