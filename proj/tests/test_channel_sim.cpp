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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "photonlink/ccr_response.hpp"
#include "photonlink/channel_sim.hpp"
#include "photonlink/scenario.hpp"

using namespace photonlink;

namespace
{

constexpr double c_light = 299'792'458.0;

std::int64_t count_class(const TagStream& s, Truth t)
{
    return std::count_if(s.events.begin(), s.events.end(), [t](const TagEvent& e) { return e.truth == t; });
}

bool within_3_sigma(double observed, double expected)
{
    return std::abs(observed - expected) <= 3.0 * std::sqrt(std::max(expected, 1.0));
}

double phase_ms(Picoseconds t) { return static_cast<double>(t % 200'000'000'000LL) * 1e-9; }

// Expected signal detections for a constant range: pulses whose return lands
// in the open shutter, times the Poisson detection probability.
double expected_signal(const Scenario& sc, double duration_s)
{
    const double range = sc.range.range_at(0.0);
    const double rtt_ms = 2.0 * range / c_light * 1e3;
    const double lo = std::max(rtt_ms, sc.schedule.rx_open_ms);
    const double hi = std::min(rtt_ms + 100.0, sc.schedule.rx_close_ms);
    const double pulses_per_period = std::max(0.0, hi - lo) * 1e-3 * sc.rep_rate_hz;
    const auto b = sc.budget(0, range);
    const double x = sc.mu_sat * b.t_down.value() * b.t_rx.value();
    return (duration_s / 0.2) * pulses_per_period * -std::expm1(-x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

TEST_CASE("effective duty cycle")
{
    ProtocolSchedule s; // default timing, rx closes at 180 ms
    CHECK(effective_duty_cycle(s, 130.0) == doctest::Approx(0.25));
    CHECK(effective_duty_cycle(s, 180.0) == doctest::Approx(0.0));
    s.rx_close_ms = 190.0;
    CHECK(effective_duty_cycle(s, 130.0) == doctest::Approx(0.3));

    ProtocolSchedule full;
    full.tx_start_ms = 0.0;
    full.tx_end_ms = 100.0;
    full.rx_open_ms = 100.0;
    full.rx_close_ms = 200.0;
    // every return lands while the shutter is open only if it falls in [100, 200)
    CHECK(effective_duty_cycle(full, 100.0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(effective_duty_cycle(s, 200.0), std::domain_error);
    CHECK_THROWS_AS(effective_duty_cycle(s, 0.0), std::domain_error);
}

TEST_CASE("expected arrival")
{
    const ProtocolSchedule s;
    const auto r195 = RangeProfile::constant(19'500e3);
    const Picoseconds rtt = expected_arrival(0, r195, s);
    CHECK(static_cast<double>(rtt) == doctest::Approx(2.0 * 19'500e3 / c_light * 1e12).epsilon(1e-11));
    CHECK(static_cast<double>(rtt) * 1e-9 == doctest::Approx(130.09).epsilon(1e-3));
    const auto r202 = RangeProfile::constant(20'200e3);
    CHECK(static_cast<double>(expected_arrival(5, r202, s) - 5 * 10'000) * 1e-9 == doctest::Approx(134.76).epsilon(1e-3));
    for (std::int64_t k = 100; k < 110; ++k)
        CHECK(expected_arrival(k + 1, r195, s) - expected_arrival(k, r195, s) == s.pulse_period_ps());
    // slot 10^7 is emitted at 100 ms, after the tx window
    CHECK_THROWS_AS(expected_arrival(10'000'000, r195, s), std::invalid_argument);
    CHECK_NOTHROW(expected_arrival(20'000'000, r195, s));
}

TEST_CASE("range profile interpolation")
{
    const RangeProfile p({{0.0, 20'000e3}, {10.0, 20'100e3}, {20.0, 20'050e3}});
    CHECK(p.range_at(-1.0) == 20'000e3);
    CHECK(p.range_at(5.0) == doctest::Approx(20'050e3));
    CHECK(p.range_at(15.0) == doctest::Approx(20'075e3));
    CHECK(p.range_at(30.0) == 20'050e3);
    CHECK(p.min_range(2.0, 19.0) == doctest::Approx(20'020e3));
    CHECK(p.mean_range(0.0, 20.0) == doctest::Approx((20'050e3 + 20'075e3) / 2.0));
    CHECK_NOTHROW(p.validate_gnss());
    CHECK_THROWS(RangeProfile({{0.0, 1e7}}));
    CHECK_THROWS(RangeProfile({{1.0, 2e7}, {0.0, 2e7}}));
    CHECK_THROWS(RangeProfile::constant(500e3).validate_gnss());
}

TEST_CASE("fluorescence amplitude reproduces the configured mean")
{
    ProtocolSchedule s;
    s.rx_close_ms = 190.0;
    NoiseModel n;
    const Picoseconds rtt = 130'000'000'000;
    const double peak = fluorescence_peak_rate(n, s, rtt);
    // numerical mean of peak * 2^{-(t - 100 ms) / 5 ms} over [130, 190) ms
    double acc = 0.0;
    const int steps = 600'000;
    for (int i = 0; i < steps; ++i)
    {
        const double t_ms = 130.0 + (i + 0.5) * 60.0 / steps;
        acc += peak * std::pow(2.0, -(t_ms - 100.0) / 5.0);
    }
    CHECK(acc / steps == doctest::Approx(195.0).epsilon(1e-6));
}

TEST_CASE("baseline signal count over 60 s")
{
    const Scenario sc = baseline_scenario();
    const auto stream = simulate_pass(sc, 60.0, 1);
    const double expected = expected_signal(sc, 60.0);
    const auto signal = count_class(stream, Truth::signal);
    CHECK(within_3_sigma(static_cast<double>(signal), expected));
    // close to the measured rate times the open fraction
    CHECK(static_cast<double>(signal) == doctest::Approx(58.0 * 0.3 * 60.0).epsilon(0.12));
    CHECK(stream.metadata.class_counts[0] == signal);
}

TEST_CASE("per-class rates converge")
{
    const Scenario sc = baseline_scenario();
    const double T = 60.0;
    const auto stream = simulate_pass(sc, T, 5);
    CHECK(within_3_sigma(static_cast<double>(count_class(stream, Truth::dark)), 700.0 * T));
    CHECK(within_3_sigma(static_cast<double>(count_class(stream, Truth::albedo)), 1900.0 * T * 85.0 / 200.0));

    // fluorescence averaged over the region where returns arrive
    const double rtt_ms = 2.0 * 19'500e3 / c_light * 1e3;
    std::int64_t in_region = 0;
    for (const auto& e : stream.events)
        if (e.truth == Truth::fluorescence && phase_ms(e.time) >= rtt_ms && phase_ms(e.time) < 190.0)
            ++in_region;
    const double region_s = (190.0 - rtt_ms) * 1e-3 * (T / 0.2);
    CHECK(within_3_sigma(static_cast<double>(in_region), 195.0 * region_s));
}

TEST_CASE("optical events only while the shutter is open")
{
    const Scenario sc = baseline_scenario();
    const auto stream = simulate_pass(sc, 20.0, 9);
    std::int64_t closed_dark = 0;
    for (const auto& e : stream.events)
    {
        const bool open = sc.schedule.rx_open_at(e.time);
        if (e.truth != Truth::dark)
            REQUIRE(open);
        else if (!open)
            ++closed_dark;
    }
    CHECK(within_3_sigma(static_cast<double>(closed_dark), 700.0 * 20.0 * 115.0 / 200.0));
}

TEST_CASE("times strictly increase per channel")
{
    Scenario sc = Scenario(load_scenario(PHOTONLINK_DATA_DIR "/scenarios/glonass131_20250km.json"));
    const auto stream = simulate_pass(sc, 10.0, 2);
    std::map<int, Picoseconds> last;
    for (const auto& e : stream.events)
    {
        if (last.count(e.channel))
            REQUIRE(e.time > last[e.channel]);
        last[e.channel] = e.time;
    }
    CHECK(last.size() == 2);
}

TEST_CASE("dead time suppresses close clicks")
{
    Scenario sc = baseline_scenario();
    sc.dead_time_ps = 50e3;
    const auto stream = simulate_pass(sc, 5.0, 4);
    for (std::size_t i = 1; i < stream.events.size(); ++i)
        REQUIRE(stream.events[i].time - stream.events[i - 1].time >= 50'000);
}

TEST_CASE("zero mu gives background only")
{
    Scenario sc = baseline_scenario();
    sc.mu_sat = 0.0;
    const auto stream = simulate_pass(sc, 10.0, 3);
    CHECK(count_class(stream, Truth::signal) == 0);
    CHECK(stream.events.size() > 0);
}

TEST_CASE("determinism and seed dependence")
{
    const Scenario sc = baseline_scenario();
    const auto a = simulate_pass(sc, 10.0, 42);
    const auto b = simulate_pass(sc, 10.0, 42);
    const auto c = simulate_pass(sc, 10.0, 43);
    CHECK(a.events == b.events);
    CHECK(a.events != c.events);
    CHECK(a.metadata.scenario_hash == sc.hash);
    CHECK(a.metadata.seed == 42);
}

TEST_CASE("serial and parallel simulations are identical")
{
    const Scenario sc = load_scenario(PHOTONLINK_DATA_DIR "/scenarios/glonass131_20250km.json");
    const auto a = simulate_pass(sc, 6.0, 17);
    const auto b = serial::simulate_pass(sc, 6.0, 17);
    CHECK(a.events == b.events);
    CHECK(a.metadata.class_counts == b.metadata.class_counts);
}

TEST_CASE("invalid simulation requests")
{
    const Scenario sc = baseline_scenario();
    CHECK_THROWS_AS(simulate_pass(sc, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pass(sc, -1.0, 1), std::invalid_argument);
}

TEST_CASE("signal residuals follow the array response convolved with jitter")
{
    Scenario sc = baseline_scenario();
    sc.incidence_rad = 9.0 * std::acos(-1.0) / 180.0;
    sc.mu_sat = 2000.0; // enough returns for a tight KS bound
    sc.noise.albedo_hz = 0.0;
    sc.noise.fluorescence_hz = 0.0;
    sc.receivers[0].dark_rate_hz = 0.0;
    const auto stream = simulate_pass(sc, 60.0, 8);

    const Picoseconds P = sc.schedule.pulse_period_ps();
    const Picoseconds rtt = round_trip_ps(sc.range.range_at(0.0));
    std::vector<double> r;
    for (const auto& e : stream.events)
    {
        if (e.truth != Truth::signal)
            continue;
        const Picoseconds x = e.time - rtt;
        const Picoseconds slot = (x + P / 2) / P;
        r.push_back(static_cast<double>(x - slot * P));
    }
    REQUIRE(r.size() >= 100'000);
    std::sort(r.begin(), r.end());

    const auto offsets = ccr_time_offsets(sc.geometry, sc.incidence_rad, sc.azimuth());
    const double sigma = std::hypot(100.0, 40.0) / 2.3548200450309493;
    auto cdf = [&](double t) {
        double acc = 0.0;
        for (double o : offsets)
            acc += normal_cdf((t - o) / sigma);
        return acc / static_cast<double>(offsets.size());
    };
    // integer-ps quantisation: compare against the CDF at the rounding boundary
    double ks = 0.0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
        const double f = cdf(r[i] + 0.5);
        ks = std::max({ks, std::abs(f - (i + 1) / n), std::abs(cdf(r[i] - 0.5) - i / n)});
    }
    CHECK(ks < 0.02);
}
