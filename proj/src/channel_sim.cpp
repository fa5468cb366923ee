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

#include "photonlink/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "photonlink/ccr_response.hpp"
#include "sim_detail.hpp"

namespace photonlink
{

namespace
{

Picoseconds ms_to_ps(double ms) { return static_cast<Picoseconds>(std::llround(ms * 1e9)); }

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

} // namespace

// ---- protocol ---------------------------------------------------------------

void ProtocolSchedule::validate() const
{
    if (!(period_ms > 0.0))
        throw std::invalid_argument("protocol period must be positive");
    if (!(tx_start_ms >= 0.0 && tx_start_ms < tx_end_ms && tx_end_ms <= period_ms))
        throw std::invalid_argument("tx window must satisfy 0 <= start < end <= period");
    if (!(rx_open_ms >= 0.0 && rx_open_ms < rx_close_ms && rx_close_ms <= period_ms))
        throw std::invalid_argument("rx window must satisfy 0 <= open < close <= period");
    if (overlap(tx_start_ms, tx_end_ms, rx_open_ms, rx_close_ms) > 0.0)
        throw std::invalid_argument("tx and rx windows overlap");
    if (!(slr_fire_ms >= 0.0 && slr_fire_ms < period_ms))
        throw std::invalid_argument("SLR fire time must lie inside the period");
    if (!(pulse_period_ns > 0.0))
        throw std::invalid_argument("pulse period must be positive");
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0))
        throw std::invalid_argument("duty cycle must lie in (0, 1]");
    if (period_ps() % pulse_period_ps() != 0)
        throw std::invalid_argument("protocol period must be a whole number of pulse periods");
}

Picoseconds ProtocolSchedule::period_ps() const { return ms_to_ps(period_ms); }
Picoseconds ProtocolSchedule::pulse_period_ps() const
{
    return static_cast<Picoseconds>(std::llround(pulse_period_ns * 1e3));
}
Picoseconds ProtocolSchedule::tx_start_ps() const { return ms_to_ps(tx_start_ms); }
Picoseconds ProtocolSchedule::tx_end_ps() const { return ms_to_ps(tx_end_ms); }
Picoseconds ProtocolSchedule::slr_fire_ps() const { return ms_to_ps(slr_fire_ms); }
Picoseconds ProtocolSchedule::rx_open_ps() const { return ms_to_ps(rx_open_ms); }
Picoseconds ProtocolSchedule::rx_close_ps() const { return ms_to_ps(rx_close_ms); }

Picoseconds ProtocolSchedule::phase(Picoseconds t) const
{
    const Picoseconds T = period_ps();
    return t - floor_div(t, T) * T;
}

bool ProtocolSchedule::rx_open_at(Picoseconds t) const
{
    const Picoseconds ph = phase(t);
    return ph >= rx_open_ps() && ph < rx_close_ps();
}

bool ProtocolSchedule::is_tx_slot(std::int64_t slot) const
{
    const Picoseconds ph = phase(slot * pulse_period_ps());
    return ph >= tx_start_ps() && ph < tx_end_ps();
}

RangeProfile::RangeProfile(std::vector<RangeSample> samples) : samples_(std::move(samples))
{
    if (samples_.size() < 2)
        throw std::invalid_argument("range profile needs at least two samples");
    for (std::size_t i = 0; i < samples_.size(); ++i)
    {
        if (!(samples_[i].range_m > 0.0) || !std::isfinite(samples_[i].range_m))
            throw std::invalid_argument("range samples must be positive");
        if (i > 0 && !(samples_[i].t_s > samples_[i - 1].t_s))
            throw std::invalid_argument("range profile times must be strictly increasing");
    }
}

RangeProfile RangeProfile::constant(double range_m) { return RangeProfile({{0.0, range_m}, {1.0, range_m}}); }

double RangeProfile::range_at(double t_s) const
{
    if (t_s <= samples_.front().t_s)
        return samples_.front().range_m;
    if (t_s >= samples_.back().t_s)
        return samples_.back().range_m;
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), t_s,
                                     [](double t, const RangeSample& s) { return t < s.t_s; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double f = (t_s - a.t_s) / (b.t_s - a.t_s);
    return a.range_m + f * (b.range_m - a.range_m);
}

double RangeProfile::min_range(double t0_s, double t1_s) const
{
    double r = std::min(range_at(t0_s), range_at(t1_s));
    for (const auto& s : samples_)
        if (s.t_s > t0_s && s.t_s < t1_s)
            r = std::min(r, s.range_m);
    return r;
}

double RangeProfile::mean_range(double t0_s, double t1_s) const
{
    if (!(t1_s > t0_s))
        return range_at(t0_s);
    // piecewise-linear, so trapezoids over the breakpoints are exact
    std::vector<double> knots{t0_s};
    for (const auto& s : samples_)
        if (s.t_s > t0_s && s.t_s < t1_s)
            knots.push_back(s.t_s);
    knots.push_back(t1_s);
    double acc = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i)
        acc += 0.5 * (range_at(knots[i - 1]) + range_at(knots[i])) * (knots[i] - knots[i - 1]);
    return acc / (t1_s - t0_s);
}

void RangeProfile::validate_gnss() const
{
    for (const auto& s : samples_)
        if (s.range_m < 19'000e3 || s.range_m > 26'000e3)
            throw std::invalid_argument("slant range " + std::to_string(s.range_m / 1e3) +
                                        " km is outside the GNSS band [19000, 26000] km");
}

Picoseconds round_trip_ps(double range_m)
{
    return static_cast<Picoseconds>(std::llround(2.0 * range_m / kSpeedOfLight * 1e12));
}

void NoiseModel::validate() const
{
    if (dark_rate_hz < 0.0 || fluorescence_hz < 0.0 || albedo_hz < 0.0)
        throw std::invalid_argument("noise rates must be non-negative");
    if (!(fluorescence_half_life_ms > 0.0))
        throw std::invalid_argument("fluorescence half-life must be positive");
}

// ---- truth classes ----------------------------------------------------------

std::string_view to_string(Truth t)
{
    switch (t)
    {
    case Truth::signal:
        return "signal";
    case Truth::dark:
        return "dark";
    case Truth::fluorescence:
        return "fluorescence";
    case Truth::albedo:
        return "albedo";
    case Truth::unknown:
        break;
    }
    return "";
}

Truth parse_truth(std::string_view name)
{
    if (name == "signal")
        return Truth::signal;
    if (name == "dark")
        return Truth::dark;
    if (name == "fluorescence")
        return Truth::fluorescence;
    if (name == "albedo")
        return Truth::albedo;
    if (name.empty())
        return Truth::unknown;
    throw std::invalid_argument("unknown truth class '" + std::string(name) + "'");
}

// ---- schedule arithmetic ----------------------------------------------------

double effective_duty_cycle(const ProtocolSchedule& s, double rtt_ms)
{
    s.validate();
    if (!(rtt_ms > 0.0 && rtt_ms < s.period_ms))
        throw std::domain_error("round-trip time must lie in (0, period)");
    // returns of the tx window, folded into one period (at most two pieces)
    double a = s.tx_start_ms + rtt_ms;
    double b = s.tx_end_ms + rtt_ms;
    a = std::fmod(a, s.period_ms);
    b = a + (s.tx_end_ms - s.tx_start_ms);
    double open = overlap(a, std::min(b, s.period_ms), s.rx_open_ms, s.rx_close_ms);
    if (b > s.period_ms)
        open += overlap(0.0, b - s.period_ms, s.rx_open_ms, s.rx_close_ms);
    return open / s.period_ms;
}

Picoseconds expected_arrival(std::int64_t pulse_index, const RangeProfile& profile, const ProtocolSchedule& schedule)
{
    if (!schedule.is_tx_slot(pulse_index))
        throw std::invalid_argument("pulse index " + std::to_string(pulse_index) + " is outside the tx window");
    const Picoseconds emit = pulse_index * schedule.pulse_period_ps();
    return emit + round_trip_ps(profile.range_at(static_cast<double>(emit) * 1e-12));
}

SignalRegion signal_region(const ProtocolSchedule& s, Picoseconds rtt)
{
    const Picoseconds T = s.period_ps();
    for (Picoseconds shift : {Picoseconds{0}, -T})
    {
        const Picoseconds a = std::max(s.tx_start_ps() + rtt + shift, s.rx_open_ps());
        const Picoseconds b = std::min(s.tx_end_ps() + rtt + shift, s.rx_close_ps());
        if (a < b)
            return {a, b};
    }
    return {};
}

double fluorescence_peak_rate(const NoiseModel& noise, const ProtocolSchedule& schedule, Picoseconds rtt)
{
    if (noise.fluorescence_hz <= 0.0)
        return 0.0;
    const SignalRegion r = signal_region(schedule, rtt);
    if (r.begin >= r.end)
        return 0.0;
    const double decay = std::log(2.0) / (noise.fluorescence_half_life_ms * 1e-3);
    const double fire = static_cast<double>(schedule.slr_fire_ps()) * 1e-12;
    const double a = std::max(static_cast<double>(r.begin) * 1e-12, fire);
    const double b = static_cast<double>(r.end) * 1e-12;
    if (a >= b)
        return 0.0;
    // mean of A exp(-decay (t - fire)) over the region equals the target rate
    const double integral = (std::exp(-decay * (a - fire)) - std::exp(-decay * (b - fire))) / decay;
    const double length = static_cast<double>(r.end - r.begin) * 1e-12;
    return noise.fluorescence_hz * length / integral;
}

// ---- simulation kernel ------------------------------------------------------

namespace detail
{

namespace
{

std::mt19937_64 make_rng(std::uint64_t seed, Truth cls, int channel, std::int64_t period)
{
    const auto p = static_cast<std::uint64_t>(period);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(cls), static_cast<std::uint32_t>(channel),
                      static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
    return std::mt19937_64(seq);
}

Transmittance downlink_at(const Scenario& sc, double range_m)
{
    return sc.budget(0, range_m).t_down;
}

// Homogeneous Poisson events on [a, b).
void poisson_uniform(std::mt19937_64& rng, double rate_hz, Picoseconds a, Picoseconds b, int channel, Truth cls,
                     std::vector<TagEvent>& out)
{
    if (rate_hz <= 0.0 || a >= b)
        return;
    std::poisson_distribution<std::int64_t> count(rate_hz * static_cast<double>(b - a) * 1e-12);
    const std::int64_t n = count(rng);
    std::uniform_int_distribution<Picoseconds> when(a, b - 1);
    for (std::int64_t i = 0; i < n; ++i)
        out.push_back({when(rng), channel, cls});
}

} // namespace

SimPlan make_sim_plan(const Scenario& sc, double duration_s, std::uint64_t seed)
{
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw std::invalid_argument("simulation duration must be positive");
    sc.validate();

    SimPlan plan;
    plan.scenario = &sc;
    plan.seed = seed;
    plan.period = sc.schedule.period_ps();
    plan.pulse_period = sc.schedule.pulse_period_ps();
    plan.duration = static_cast<Picoseconds>(std::llround(duration_s * 1e12));
    plan.n_periods = ceil_div(plan.duration, plan.period);

    plan.offsets_ps = ccr_time_offsets(sc.geometry, sc.incidence_rad, sc.azimuth());
    plan.pulse_sigma_ps = fwhm_to_sigma(sc.pulse_fwhm_ps);

    const double mean_range = sc.mean_range_m(duration_s);
    plan.fluo_peak_hz = fluorescence_peak_rate(sc.noise, sc.schedule, round_trip_ps(mean_range));
    plan.fluo_decay_per_s = std::log(2.0) / (sc.noise.fluorescence_half_life_ms * 1e-3);

    const double r_min = sc.range.min_range(0.0, duration_s);
    const Transmittance t_down_max = downlink_at(sc, r_min);
    const double t_rx0 = receiver_transmittance(sc.receivers.front()).value();
    for (const auto& rx : sc.receivers)
    {
        ChannelPlan c;
        c.channel = rx.channel_id;
        const Transmittance t_rx = receiver_transmittance(rx);
        c.t_rx = t_rx.value();
        c.p_max = detection_probability(sc.mu_sat, t_down_max, t_rx);
        c.optical_scale = c.t_rx / t_rx0;
        c.dark_hz = rx.dark_rate_hz;
        c.jitter_sigma_ps = fwhm_to_sigma(rx.jitter_fwhm_ps);
        plan.channels.push_back(c);
    }
    return plan;
}

void simulate_period(const SimPlan& plan, std::int64_t m, std::vector<TagEvent>& out)
{
    const Scenario& sc = *plan.scenario;
    const ProtocolSchedule& sched = sc.schedule;
    const Picoseconds start = m * plan.period;
    const Picoseconds stop = std::min(start + plan.period, plan.duration);
    const auto clip = [&](Picoseconds t) { return std::clamp(t, Picoseconds{0}, plan.duration); };
    const Picoseconds open_a = clip(start + sched.rx_open_ps());
    const Picoseconds open_b = clip(start + sched.rx_close_ps());

    for (const auto& ch : plan.channels)
    {
        // signal: Bernoulli per pulse, sampled by geometric skips at p_max and thinned
        if (ch.p_max > 0.0)
        {
            auto rng = make_rng(plan.seed, Truth::signal, ch.channel, m);
            std::geometric_distribution<std::int64_t> skip(std::min(ch.p_max, 1.0 - 1e-15));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::uniform_int_distribution<std::size_t> pick(0, plan.offsets_ps.size() - 1);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const std::int64_t k_begin = ceil_div(start + sched.tx_start_ps(), plan.pulse_period);
            const std::int64_t k_end = ceil_div(start + sched.tx_end_ps(), plan.pulse_period);
            const Transmittance t_rx(ch.t_rx);
            for (std::int64_t k = k_begin + skip(rng); k < k_end; k += 1 + skip(rng))
            {
                const Picoseconds emit = k * plan.pulse_period;
                const double range = sc.range.range_at(static_cast<double>(emit) * 1e-12);
                const Picoseconds arrival = emit + round_trip_ps(range);
                const double accept = u(rng);
                const std::size_t ccr = pick(rng);
                const double spread = gauss(rng) * plan.pulse_sigma_ps + gauss(rng) * ch.jitter_sigma_ps;
                if (arrival >= plan.duration || !sched.rx_open_at(arrival))
                    continue;
                const double p = detection_probability(sc.mu_sat, downlink_at(sc, range), t_rx);
                if (accept * ch.p_max >= p)
                    continue;
                const Picoseconds t = arrival + std::llround(plan.offsets_ps[ccr] + spread);
                if (t >= 0 && t < plan.duration)
                    out.push_back({t, ch.channel, Truth::signal});
            }
        }

        {
            auto rng = make_rng(plan.seed, Truth::dark, ch.channel, m);
            poisson_uniform(rng, ch.dark_hz, start, stop, ch.channel, Truth::dark, out);
        }
        {
            auto rng = make_rng(plan.seed, Truth::albedo, ch.channel, m);
            poisson_uniform(rng, sc.noise.albedo_hz * ch.optical_scale, open_a, open_b, ch.channel, Truth::albedo,
                            out);
        }
        if (plan.fluo_peak_hz > 0.0)
        {
            // exponential decay from the SLR pulse, visible only while the shutter is open
            auto rng = make_rng(plan.seed, Truth::fluorescence, ch.channel, m);
            const Picoseconds fire = start + sched.slr_fire_ps();
            const Picoseconds a = std::max(open_a, fire);
            if (a < open_b)
            {
                const double lam = plan.fluo_decay_per_s;
                const double x0 = static_cast<double>(a - fire) * 1e-12;
                const double x1 = static_cast<double>(open_b - fire) * 1e-12;
                const double amp = plan.fluo_peak_hz * ch.optical_scale;
                const double mass = amp * (std::exp(-lam * x0) - std::exp(-lam * x1)) / lam;
                std::poisson_distribution<std::int64_t> count(mass);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                const std::int64_t n = count(rng);
                const double span = -std::expm1(-lam * (x1 - x0));
                for (std::int64_t i = 0; i < n; ++i)
                {
                    const double dx = -std::log1p(-u(rng) * span) / lam;
                    const Picoseconds t = std::min(a + static_cast<Picoseconds>(dx * 1e12), open_b - 1);
                    out.push_back({t, ch.channel, Truth::fluorescence});
                }
            }
        }
    }
}

TagStream finalize_stream(const SimPlan& plan, std::vector<std::vector<TagEvent>>&& per_period)
{
    std::size_t total = 0;
    for (const auto& v : per_period)
        total += v.size();
    std::vector<TagEvent> all;
    all.reserve(total);
    for (auto& v : per_period)
    {
        all.insert(all.end(), v.begin(), v.end());
        std::vector<TagEvent>().swap(v);
    }
    std::sort(all.begin(), all.end(), [](const TagEvent& a, const TagEvent& b) {
        if (a.time != b.time)
            return a.time < b.time;
        if (a.channel != b.channel)
            return a.channel < b.channel;
        return a.truth < b.truth;
    });

    const auto dead = static_cast<Picoseconds>(std::llround(plan.scenario->dead_time_ps));
    std::map<int, Picoseconds> last;
    TagStream stream;
    stream.events.reserve(all.size());
    for (const auto& e : all)
    {
        auto it = last.find(e.channel);
        // one click per channel per picosecond, none inside the dead time
        if (it != last.end() && (e.time == it->second || e.time - it->second < dead))
            continue;
        last[e.channel] = e.time;
        stream.events.push_back(e);
    }

    auto& md = stream.metadata;
    md.scenario_hash = plan.scenario->hash;
    md.seed = plan.seed;
    md.duration_s = static_cast<double>(plan.duration) * 1e-12;
    for (const auto& ch : plan.channels)
        md.channel_counts[ch.channel] = 0;
    for (const auto& e : stream.events)
    {
        ++md.class_counts[static_cast<std::size_t>(e.truth)];
        ++md.channel_counts[e.channel];
    }
    return stream;
}

} // namespace detail

TagStream simulate_pass(const Scenario& scenario, double duration_s, std::uint64_t seed)
{
    const auto plan = detail::make_sim_plan(scenario, duration_s, seed);
    std::vector<std::vector<TagEvent>> per_period(static_cast<std::size_t>(plan.n_periods));
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t m = 0; m < plan.n_periods; ++m)
        detail::simulate_period(plan, m, per_period[static_cast<std::size_t>(m)]);
    return detail::finalize_stream(plan, std::move(per_period));
}

} // namespace photonlink
