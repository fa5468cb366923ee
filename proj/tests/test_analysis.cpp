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
#include <limits>
#include <random>
#include <stdexcept>

#include "photonlink/analysis.hpp"
#include "photonlink/scenario.hpp"

using namespace photonlink;

namespace
{

constexpr Picoseconds P = 10'000;

// Reference wrap by brute force: shift by whole periods until inside (-P/2, P/2].
Picoseconds wrap_oracle(Picoseconds x, Picoseconds period)
{
    while (x > period / 2)
        x -= period;
    while (x <= -period / 2)
        x += period;
    return x;
}

// Uniformly distributed tags on one channel with references every P.
std::vector<TagEvent> uniform_tags(std::size_t n, std::uint64_t seed, Picoseconds span)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Picoseconds> u(P, span - P);
    std::vector<TagEvent> tags(n);
    for (auto& t : tags)
        t = {u(rng), 0, Truth::dark};
    std::sort(tags.begin(), tags.end(), [](const TagEvent& a, const TagEvent& b) { return a.time < b.time; });
    return tags;
}

std::vector<Picoseconds> pulse_train(Picoseconds span)
{
    std::vector<Picoseconds> refs;
    for (Picoseconds t = 0; t <= span; t += P)
        refs.push_back(t);
    return refs;
}

ResidualSet synthetic(std::initializer_list<std::pair<Picoseconds, Picoseconds>> time_residual)
{
    ResidualSet rs;
    rs.pulse_period = P;
    for (auto [t, r] : time_residual)
        rs.items.push_back({t, r, Truth::unknown});
    return rs;
}

} // namespace

TEST_CASE("residual wrapping")
{
    CHECK(wrap_residual(0, P) == 0);
    CHECK(wrap_residual(5'000, P) == 5'000);
    CHECK(wrap_residual(-5'000, P) == 5'000);
    CHECK(wrap_residual(5'001, P) == -4'999);
    CHECK(wrap_residual(123'456'789, P) == wrap_oracle(123'456'789, P));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Picoseconds> u(-1'000'000'000'000, 1'000'000'000'000);
    for (int i = 0; i < 10'000; ++i)
    {
        const Picoseconds x = u(rng) % 10'000'000;
        REQUIRE(wrap_residual(x, P) == wrap_oracle(x, P));
    }
}

TEST_CASE("uniform noise gives uniform residuals")
{
    const Picoseconds span = 2'000'000'000;
    const auto tags = uniform_tags(100'000, 12, span);
    const auto refs = pulse_train(span);
    const auto rs = residuals(tags, refs, P, 0);
    REQUIRE(rs.items.size() == tags.size());
    std::vector<double> r;
    for (const auto& x : rs.items)
        r.push_back(static_cast<double>(x.residual));
    std::sort(r.begin(), r.end());
    double ks = 0.0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
        // integer residuals in (-P/2, P/2]: F(r) = (r + P/2) / P
        const double f = (r[i] + 5'000.0) / 10'000.0;
        ks = std::max({ks, std::abs(f - (i + 1) / n), std::abs(f - 1.0 / 10'000.0 - i / n)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("expected arrivals honour the shutter and tx window")
{
    Scenario sc = baseline_scenario();
    const ExpectedArrivals refs(sc.schedule, sc.range);
    const Picoseconds rtt = round_trip_ps(sc.range.range_at(0.0));
    CHECK(refs.arrival(0) == rtt);
    // a tag 3 ns after the 1000th return
    const Picoseconds t = refs.arrival(1000) + 3'000;
    REQUIRE(refs.nearest(t).has_value());
    CHECK(*refs.nearest(t) == refs.arrival(1000));
    // before the first return of the period and while the shutter is closed
    CHECK_FALSE(refs.nearest(rtt - 10 * P).has_value());
    CHECK_FALSE(refs.nearest(50'000'000'000).has_value());
}

TEST_CASE("windowed counts")
{
    SUBCASE("all residuals at zero")
    {
        std::vector<Residual> rs(500, Residual{0, 0, Truth::signal});
        const auto c = windowed_counts(rs, P, 400.0, 1000.0);
        CHECK(c.total_in_window == 500);
        CHECK(c.outside == 0);
        CHECK(c.background_in_window == 0.0);
        CHECK(c.scale == doctest::Approx(400.0 / 8000.0));
    }
    SUBCASE("noise background estimate is unbiased")
    {
        const auto tags = uniform_tags(400'000, 99, 4'000'000'000);
        const auto rs = residuals(tags, pulse_train(4'000'000'000), P, 0);
        const auto c = windowed_counts(rs.items, P, 400.0, 1000.0);
        const double n = static_cast<double>(rs.items.size());
        // 401 of the 10000 integer residuals fall in |r| <= 200
        const double expected = n * 401.0 / 10'000.0;
        CHECK(std::abs(static_cast<double>(c.total_in_window) - expected) < 3.0 * std::sqrt(expected));
        CHECK(c.background_in_window == doctest::Approx(expected).epsilon(0.02));
    }
    SUBCASE("invalid geometry")
    {
        std::vector<Residual> rs;
        CHECK_THROWS_AS(windowed_counts(rs, P, 0.0, 1000.0), std::invalid_argument);
        CHECK_THROWS_AS(windowed_counts(rs, P, 2500.0, 1000.0), std::invalid_argument);
        CHECK_THROWS_AS(windowed_counts(rs, P, 400.0, 5000.0), std::invalid_argument);
    }
}

TEST_CASE("background estimator is unbiased across seeds")
{
    double est = 0.0, truth = 0.0;
    const Picoseconds span = 200'000'000;
    const auto refs = pulse_train(span);
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        const auto rs = residuals(uniform_tags(20'000, 1000 + seed, span), refs, P, 0);
        const auto c = windowed_counts(rs.items, P, 400.0, 1000.0);
        est += c.background_in_window;
        truth += static_cast<double>(c.total_in_window);
    }
    CHECK(std::abs(est - truth) / truth < 0.01);
}

TEST_CASE("interval statistics by hand")
{
    AnalysisParams p;
    p.interval_s = 1.0;
    p.duty_cycle = 0.5;
    // interval 0: 3 in window, 4 outside the exclusion; interval 1: 1 in window
    const auto rs = synthetic({{1, 0},
                               {2, 150},
                               {3, -200},
                               {4, 2000},
                               {5, -3000},
                               {6, 4999},
                               {7, 1200},
                               {8, 600},
                               {1'000'000'000'001, 10}});
    const auto stats = interval_stats(rs, 2.5, p);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].n_tot_w == 3);
    CHECK(stats[0].n_bkg_w == doctest::Approx(4.0 * 400.0 / 8000.0));
    CHECK(stats[0].n_det == doctest::Approx(3.0 - 0.2));
    CHECK(stats[0].r_det_hz == doctest::Approx(2.8 / 0.5));
    CHECK(stats[0].snr == doctest::Approx(2.8 / 0.2));
    CHECK(stats[1].n_tot_w == 1);
    CHECK(stats[1].snr == std::numeric_limits<double>::infinity());

    CHECK_THROWS(interval_stats(rs, -1.0, p));
    AnalysisParams bad = p;
    bad.window_ps = 0.0;
    CHECK_THROWS(interval_stats(rs, 1.0, bad));
}

TEST_CASE("interval filtering thresholds")
{
    const Scenario sc = baseline_scenario();
    const auto stream = simulate_pass(sc, 30.0, 2);
    const ExpectedArrivals refs(sc.schedule, sc.range);
    const auto rs = residuals(stream.events, refs, 0);
    auto stats = interval_stats(rs, 30.0, sc.analysis);
    REQUIRE(stats.size() == 6);
    CHECK(filter_intervals(stats, 0.0).size() == 6);
    CHECK(filter_intervals(stats, 30.0).size() == 6);
    CHECK(filter_intervals(stats, std::numeric_limits<double>::infinity()).empty());
    CHECK(std::none_of(stats.begin(), stats.end(), [](const IntervalStats& s) { return s.selected; }));
}

TEST_CASE("serial and parallel analysis agree")
{
    const Scenario sc = baseline_scenario();
    const auto stream = simulate_pass(sc, 20.0, 6);
    const ExpectedArrivals refs(sc.schedule, sc.range);
    const auto a = residuals(stream.events, refs, 0);
    const auto b = serial::residuals(stream.events, refs, 0);
    REQUIRE(a.items.size() == b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i)
        REQUIRE((a.items[i].time == b.items[i].time && a.items[i].residual == b.items[i].residual));
    const auto sa = interval_stats(a, 20.0, sc.analysis);
    const auto sb = serial::interval_stats(b, 20.0, sc.analysis);
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i)
    {
        CHECK(sa[i].n_tot_w == sb[i].n_tot_w);
        CHECK(sa[i].n_bkg_w == sb[i].n_bkg_w);
        CHECK(sa[i].r_det_hz == sb[i].r_det_hz);
    }
}

TEST_CASE("histogram")
{
    const auto rs = synthetic({{1, 0}, {2, -1}, {3, 99}, {4, 100}, {5, 5000}, {6, -4999}, {1'000'000'000'001, 10}});
    const auto h = residual_histogram(rs, 100.0);
    CHECK(h.total() == 7);
    CHECK(h.first_edge_ps == -5000.0);
    CHECK(h.counts.size() == 100);
    CHECK(h.counts[50] == 3); // 0, 99 and 10 share [0, 100)
    CHECK(h.counts[49] == 1);
    CHECK(h.counts[51] == 1);
    CHECK(h.counts.back() == 1);
    CHECK(h.counts.front() == 1);

    IntervalStats only_first;
    only_first.k = 0;
    only_first.selected = true;
    const std::vector<IntervalStats> sel{only_first};
    CHECK(residual_histogram(rs, 100.0, sel, 1.0).total() == 6);
    CHECK_THROWS(residual_histogram(rs, 0.0));
    CHECK_THROWS(residual_histogram(rs, 100.0, sel, 0.0));
}

TEST_CASE("empty selection reports no signal")
{
    const auto s = estimate_pass_summary({}, baseline_scenario().budget(0, 19'500e3), 1e8, 12);
    CHECK(s.no_signal);
    CHECK(s.intervals_total == 12);
    CHECK(s.intervals_selected == 0);
}

TEST_CASE("period occupancy")
{
    Scenario sc = baseline_scenario();
    const Picoseconds rtt = round_trip_ps(sc.range.range_at(0.0));

    const auto empty = period_occupancy({}, sc.schedule, rtt, 10.0);
    CHECK(empty.closed_hz.size() == 200);
    CHECK(std::all_of(empty.closed_hz.begin(), empty.closed_hz.end(), [](double v) { return v == 0.0; }));

    const auto stream = simulate_pass(sc, 60.0, 21);
    const auto occ = period_occupancy(stream.events, sc.schedule, rtt, 60.0);
    // closed shutter: dark counts only
    double closed = 0.0;
    int closed_bins = 0;
    for (std::size_t b = 0; b < 100; ++b)
    {
        closed += occ.closed_hz[b];
        ++closed_bins;
    }
    CHECK(closed / closed_bins == doctest::Approx(700.0).epsilon(0.05));
    CHECK_THROWS(period_occupancy(stream.events, sc.schedule, rtt, 60.0, 0.0));
}

TEST_CASE("fluorescence decay recovered from occupancy")
{
    Scenario sc = baseline_scenario();
    sc.noise.fluorescence_hz = 2000.0;
    const auto stream = simulate_pass(sc, 60.0, 31);
    std::vector<TagEvent> fluo;
    std::copy_if(stream.events.begin(), stream.events.end(), std::back_inserter(fluo),
                 [](const TagEvent& e) { return e.truth == Truth::fluorescence; });
    const Picoseconds rtt = round_trip_ps(sc.range.range_at(0.0));
    const auto occ = period_occupancy(fluo, sc.schedule, rtt, 60.0);

    // least squares on log rate over 131..150 ms
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t b = 131; b < 151; ++b)
    {
        const double rate = occ.signal_region_hz[b] + occ.open_other_hz[b];
        REQUIRE(rate > 0.0);
        const double x = static_cast<double>(b) + 0.5, y = std::log(rate);
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double half_life = -std::log(2.0) / slope;
    CHECK(half_life == doctest::Approx(5.0).epsilon(0.10));
}

TEST_CASE("closure against truth")
{
    const Scenario sc = baseline_scenario();
    const auto stream = simulate_pass(sc, 120.0, 77);
    const auto a = analyze_channel(stream.events, sc, 0, 120.0);
    double det = 0.0, var = 0.0;
    std::int64_t truth = 0;
    for (const auto& s : a.intervals)
    {
        det += s.n_det;
        var += s.var_n_det;
        truth += s.n_signal_truth_w;
    }
    CHECK(std::abs(det - static_cast<double>(truth)) < 3.0 * std::sqrt(var));
    CHECK_FALSE(a.summary.no_signal);
    CHECK(a.summary.intervals_selected == 24);
    CHECK(a.summary.mu_sat == doctest::Approx(sc.mu_sat).epsilon(0.10));
}

TEST_CASE("PMT and SPAD channels")
{
    const Scenario sc = load_scenario(PHOTONLINK_DATA_DIR "/scenarios/glonass131_20250km.json");
    const auto stream = simulate_pass(sc, 300.0, 4);
    const auto spad = analyze_channel(stream.events, sc, 0, 300.0);
    const auto pmt = analyze_channel(stream.events, sc, 1, 300.0);
    REQUIRE_FALSE(spad.summary.no_signal);
    REQUIRE_FALSE(pmt.summary.no_signal);
    const double ratio = spad.summary.r_det_hz / pmt.summary.r_det_hz;
    CHECK(ratio > 3.5);
    CHECK(ratio < 7.0);
    CHECK_THROWS(analyze_channel(stream.events, sc, 5, 300.0));
}
