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
#include <numeric>
#include <stdexcept>

#include "photonlink/ccr_response.hpp"

using namespace photonlink;

namespace
{

const double pi = std::acos(-1.0);
constexpr double c_light = 299'792'458.0;
double deg(double d) { return d * pi / 180.0; }

double spread(const std::vector<double>& v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

// Two narrow Gaussians `separation` ps apart on a 5 ps grid.
TemporalProfile two_spikes(double separation)
{
    TemporalProfile p;
    p.bin_width_ps = 5.0;
    p.origin_ps = -500.0;
    p.densities.assign(400, 0.0);
    for (std::size_t i = 0; i < p.densities.size(); ++i)
    {
        const double t = p.bin_center(i);
        p.densities[i] = std::exp(-0.5 * std::pow(t / 5.0, 2)) + std::exp(-0.5 * std::pow((t - separation) / 5.0, 2));
    }
    return p;
}

} // namespace

TEST_CASE("lobe displacement")
{
    CHECK(lobe_displacement(532e-9, 0.026) == doctest::Approx(28.6e-6).epsilon(1e-3));
    CHECK(lobe_displacement(532e-9, 0.052) == doctest::Approx(0.5 * lobe_displacement(532e-9, 0.026)));
    CHECK(lobe_displacement(1064e-9, 0.026) == doctest::Approx(1.4 * 1064e-9 / 0.026).epsilon(1e-14));
    CHECK(lobe_displacement(1064e-9, 0.026) == doctest::Approx(57.3e-6).epsilon(1e-3));
    CHECK_THROWS_AS(lobe_displacement(532e-9, 0.0), std::domain_error);
}

TEST_CASE("velocity aberration check")
{
    const auto a = velocity_aberration_check(28.6e-6, 26e-6, 5e-6);
    CHECK(a.on_lobe);
    CHECK(a.gap_rad == doctest::Approx(2.6e-6));
    const auto b = velocity_aberration_check(20e-6, 20e-6, 1e-6);
    CHECK(b.on_lobe);
    CHECK(b.gap_rad == 0.0);
    CHECK_FALSE(velocity_aberration_check(28.6e-6, 5e-6, 5e-6).on_lobe);
}

TEST_CASE("time offsets")
{
    const auto ring = ring_geometry(0.42, 36);
    for (double o : ccr_time_offsets(ring, 0.0, 0.3))
        CHECK(o == 0.0);

    ArrayGeometry single;
    single.positions = {{0.21, 0.0}};
    const auto d = ccr_path_delays(single, deg(9.0), 0.0);
    CHECK(d[0] == doctest::Approx(2.0 * 0.21 * std::sin(deg(9.0)) / c_light * 1e12).epsilon(1e-12));
    CHECK(d[0] == doctest::Approx(219.0).epsilon(2e-3));
    CHECK(ccr_time_offsets(single, deg(9.0), 0.0)[0] == doctest::Approx(0.0));

    ArrayGeometry mirrored;
    mirrored.positions = {{0.1, 0.02}, {-0.1, -0.02}, {0.05, -0.07}, {-0.05, 0.07}};
    auto off = ccr_time_offsets(mirrored, deg(7.0), 0.4);
    CHECK(off[0] == doctest::Approx(-off[1]));
    CHECK(off[2] == doctest::Approx(-off[3]));
    CHECK(std::accumulate(off.begin(), off.end(), 0.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(ccr_time_offsets(ring, deg(90.0), 0.0), std::domain_error);
}

TEST_CASE("offset spread scales as sin(incidence)")
{
    const auto ring = ring_geometry(kDefaultRingDiameter_m, kDefaultRingCount);
    const double az = max_spread_azimuth(ring);
    const double s9 = spread(ccr_time_offsets(ring, deg(9.0), az));
    const double s5 = spread(ccr_time_offsets(ring, deg(5.0), az));
    CHECK(s9 / s5 == doctest::Approx(std::sin(deg(9.0)) / std::sin(deg(5.0))).epsilon(1e-12));
    CHECK(s9 == doctest::Approx(2.0 * 0.42 * std::sin(deg(9.0)) / c_light * 1e12).epsilon(1e-9));
    // the diameter implied by the reported separations
    const double d9 = 430e-12 * c_light / (2.0 * std::sin(deg(9.0)));
    const double d5 = 250e-12 * c_light / (2.0 * std::sin(deg(5.0)));
    CHECK(d9 == doctest::Approx(0.412).epsilon(5e-3));
    CHECK(d5 == doctest::Approx(0.430).epsilon(5e-3));
    CHECK(std::abs(d9 - d5) / d5 < 0.05);
}

TEST_CASE("impulse response normalisation and shape")
{
    const auto ring = ring_geometry(0.42, 36);
    const GaussianPulse pulse(100.0);
    for (double inc : {0.0, 3.0, 5.0, 9.0, 20.0})
    {
        const auto p = array_impulse_response(ring, deg(inc), max_spread_azimuth(ring), pulse, 5.0);
        CHECK(p.area() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::all_of(p.densities.begin(), p.densities.end(), [](double d) { return d >= 0.0; }));
    }

    // at normal incidence the profile is the pulse itself
    const auto flat = array_impulse_response(ring, 0.0, 0.0, pulse, 5.0);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < flat.densities.size(); ++i)
        mean += flat.bin_center(i) * flat.densities[i] * flat.bin_width_ps;
    for (std::size_t i = 0; i < flat.densities.size(); ++i)
        var += std::pow(flat.bin_center(i) - mean, 2) * flat.densities[i] * flat.bin_width_ps;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::sqrt(var) == doctest::Approx(100.0 / 2.3548200450309493).epsilon(3e-3));
    CHECK(peak_to_peak(flat) == 0.0);

    CHECK_THROWS_AS(array_impulse_response(ring, deg(5.0), 0.0, pulse, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(array_impulse_response(ArrayGeometry{}, deg(5.0), 0.0, pulse, 5.0), std::invalid_argument);
}

TEST_CASE("tilted ring gives a bimodal profile")
{
    const auto ring = ring_geometry(0.42, 36);
    const GaussianPulse pulse(100.0);
    const double az = max_spread_azimuth(ring);
    const double pp9 = peak_to_peak(array_impulse_response(ring, deg(9.0), az, pulse, 5.0));
    const double pp5 = peak_to_peak(array_impulse_response(ring, deg(5.0), az, pulse, 5.0));
    // within one 100 ps histogram bin of the reported 430 ps and 250 ps
    CHECK(std::abs(pp9 - 430.0) <= 100.0);
    CHECK(std::abs(pp5 - 250.0) <= 100.0);
    CHECK(pp9 > pp5);
    // blur by the pulse pulls the peaks inward, so the separations stay below the offset spread
    CHECK(pp9 < spread(ccr_time_offsets(ring, deg(9.0), az)));
    CHECK(pp5 < spread(ccr_time_offsets(ring, deg(5.0), az)));
}

TEST_CASE("peak to peak on constructed profiles")
{
    CHECK(peak_to_peak(two_spikes(300.0), 150.0, 1) == doctest::Approx(300.0).epsilon(0.02));
    CHECK(peak_to_peak(two_spikes(300.0)) == doctest::Approx(300.0).epsilon(0.02));
    // too close together for the separation rule
    CHECK(peak_to_peak(two_spikes(100.0), 150.0, 1) == 0.0);
    TemporalProfile empty;
    CHECK(peak_to_peak(empty) == 0.0);
}

TEST_CASE("serial and parallel impulse responses agree")
{
    const auto disk = disk_geometry(0.6, 0.2, 0.026);
    const GaussianPulse pulse(100.0);
    const auto a = array_impulse_response(disk, deg(9.0), 0.7, pulse, 2.0);
    const auto b = serial::array_impulse_response(disk, deg(9.0), 0.7, pulse, 2.0);
    REQUIRE(a.densities.size() == b.densities.size());
    CHECK(a.origin_ps == b.origin_ps);
    for (std::size_t i = 0; i < a.densities.size(); ++i)
        REQUIRE(std::abs(a.densities[i] - b.densities[i]) < 1e-12);
}

TEST_CASE("weights hook")
{
    ArrayGeometry g;
    g.positions = {{0.2, 0.0}, {-0.2, 0.0}};
    const GaussianPulse pulse(100.0);
    const std::vector<double> w{3.0, 1.0};
    const auto p = array_impulse_response(g, deg(9.0), 0.0, pulse, 5.0, w);
    CHECK(p.area() == doctest::Approx(1.0));
    // the heavier CCR is further away, so the later half of the profile holds 3/4 of the area
    double late = 0.0;
    for (std::size_t i = 0; i < p.densities.size(); ++i)
        if (p.bin_center(i) > 0.0)
            late += p.densities[i] * p.bin_width_ps;
    CHECK(late == doctest::Approx(0.75).epsilon(1e-3));
}

TEST_CASE("geometry builders")
{
    const auto ring = ring_geometry(0.42, 36);
    CHECK(ring.positions.size() == 36);
    for (const auto& p : ring.positions)
        CHECK(std::hypot(p.x_m, p.y_m) == doctest::Approx(0.21));
    CHECK_NOTHROW(ring.validate());

    const auto rect = rectangle_geometry(0.36, 0.24, 6, 4);
    CHECK(rect.positions.size() == 24);
    CHECK_NOTHROW(rect.validate());

    const auto disk = disk_geometry(0.5, 0.2, 0.026);
    CHECK_NOTHROW(disk.validate());
    for (const auto& p : disk.positions)
        CHECK(std::hypot(p.x_m, p.y_m) >= 0.1);

    ArrayGeometry bad = ring;
    bad.positions.push_back({0.5, 0.0});
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(ArrayGeometry{}.validate());
}
