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

#include "photonlink/ccr_response.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "response_detail.hpp"

namespace photonlink
{

void ArrayGeometry::validate() const
{
    if (positions.empty())
        throw std::invalid_argument("array geometry has no CCR positions");
    constexpr double slack = 1e-9;
    for (const auto& p : positions)
    {
        if (!std::isfinite(p.x_m) || !std::isfinite(p.y_m))
            throw std::invalid_argument("non-finite CCR position");
        if (shape == ArrayShape::rectangle && width_m > 0.0 && height_m > 0.0)
        {
            if (std::abs(p.x_m) > 0.5 * width_m + slack || std::abs(p.y_m) > 0.5 * height_m + slack)
                throw std::invalid_argument("CCR position outside the rectangular outline");
        }
        else if (shape != ArrayShape::rectangle && outer_diameter_m > 0.0)
        {
            if (std::hypot(p.x_m, p.y_m) > 0.5 * outer_diameter_m + slack)
                throw std::invalid_argument("CCR position outside the circular outline");
        }
    }
}

ArrayGeometry ring_geometry(double diameter_m, int count)
{
    if (!(diameter_m > 0.0) || count <= 0)
        throw std::invalid_argument("ring needs a positive diameter and CCR count");
    ArrayGeometry g;
    g.shape = ArrayShape::ring;
    g.outer_diameter_m = diameter_m;
    g.positions.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
    {
        const double a = 2.0 * kPi * i / count;
        g.positions.push_back({0.5 * diameter_m * std::cos(a), 0.5 * diameter_m * std::sin(a)});
    }
    return g;
}

ArrayGeometry rectangle_geometry(double width_m, double height_m, int columns, int rows)
{
    if (!(width_m > 0.0 && height_m > 0.0) || columns <= 0 || rows <= 0)
        throw std::invalid_argument("rectangle needs positive size and grid dimensions");
    ArrayGeometry g;
    g.shape = ArrayShape::rectangle;
    g.width_m = width_m;
    g.height_m = height_m;
    const double dx = width_m / columns;
    const double dy = height_m / rows;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < columns; ++c)
            g.positions.push_back({-0.5 * width_m + (c + 0.5) * dx, -0.5 * height_m + (r + 0.5) * dy});
    return g;
}

ArrayGeometry disk_geometry(double outer_diameter_m, double inner_diameter_m, double pitch_m)
{
    if (!(outer_diameter_m > 0.0) || !(pitch_m > 0.0) || inner_diameter_m < 0.0 ||
        inner_diameter_m >= outer_diameter_m)
        throw std::invalid_argument("disk needs 0 <= inner < outer diameter and a positive pitch");
    ArrayGeometry g;
    g.shape = ArrayShape::disk;
    g.outer_diameter_m = outer_diameter_m;
    double r = std::max(0.5 * inner_diameter_m + 0.5 * pitch_m, 0.0);
    if (inner_diameter_m == 0.0)
    {
        g.positions.push_back({0.0, 0.0});
        r = pitch_m;
    }
    for (; r <= 0.5 * outer_diameter_m + 1e-12; r += pitch_m)
    {
        const int n = std::max(1, static_cast<int>(std::floor(2.0 * kPi * r / pitch_m)));
        for (int i = 0; i < n; ++i)
        {
            const double a = 2.0 * kPi * i / n;
            g.positions.push_back({r * std::cos(a), r * std::sin(a)});
        }
    }
    if (g.positions.empty())
        g.positions.push_back({0.5 * (0.5 * inner_diameter_m + 0.5 * outer_diameter_m), 0.0});
    return g;
}

ArrayGeometry geometry_from_spec(const CcrArraySpec& spec)
{
    switch (spec.shape)
    {
    case ArrayShape::ring:
        return ring_geometry(spec.outer_diameter_m, spec.count);
    case ArrayShape::disk:
        return disk_geometry(spec.outer_diameter_m, spec.inner_diameter_m, spec.ccr.diameter_m);
    case ArrayShape::rectangle: {
        const int cols =
            std::max(1, static_cast<int>(std::lround(std::sqrt(spec.count * spec.width_m / spec.height_m))));
        const int rows = std::max(1, static_cast<int>(std::lround(static_cast<double>(spec.count) / cols)));
        return rectangle_geometry(spec.width_m, spec.height_m, cols, rows);
    }
    }
    throw std::invalid_argument("unknown array shape");
}

double lobe_displacement(double wavelength_m, double ccr_diameter_m)
{
    if (!(wavelength_m > 0.0) || !(ccr_diameter_m > 0.0))
        throw std::domain_error("wavelength and CCR diameter must be positive");
    return 1.4 * wavelength_m / ccr_diameter_m;
}

AberrationCheck velocity_aberration_check(double lobe_rad, double aberration_rad, double tolerance_rad)
{
    const double gap = std::abs(lobe_rad - aberration_rad);
    return {gap <= tolerance_rad, gap};
}

std::vector<double> ccr_path_delays(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad)
{
    if (!(incidence_rad >= 0.0 && incidence_rad < 0.5 * kPi))
        throw std::domain_error("incidence angle must lie in [0, pi/2)");
    const double ux = std::cos(azimuth_rad);
    const double uy = std::sin(azimuth_rad);
    const double scale = 2.0 * std::sin(incidence_rad) / kSpeedOfLight * 1e12;
    std::vector<double> out;
    out.reserve(geom.positions.size());
    for (const auto& p : geom.positions)
        out.push_back((p.x_m * ux + p.y_m * uy) * scale);
    return out;
}

std::vector<double> ccr_time_offsets(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad)
{
    auto d = ccr_path_delays(geom, incidence_rad, azimuth_rad);
    if (d.empty())
        return d;
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    for (auto& x : d)
        x -= mean;
    return d;
}

double max_spread_azimuth(const ArrayGeometry& geom)
{
    geom.validate();
    constexpr int steps = 720;
    double best_az = 0.0;
    double best_spread = -1.0;
    for (int i = 0; i < steps; ++i)
    {
        const double az = kPi * i / steps;
        const double ux = std::cos(az), uy = std::sin(az);
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& p : geom.positions)
        {
            const double s = p.x_m * ux + p.y_m * uy;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (hi - lo > best_spread + 1e-12)
        {
            best_spread = hi - lo;
            best_az = az;
        }
    }
    return best_az;
}

double TemporalProfile::area() const
{
    return std::accumulate(densities.begin(), densities.end(), 0.0) * bin_width_ps;
}

namespace detail
{

ResponseLayout response_layout(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                               const GaussianPulse& pulse, double bin_width_ps, std::span<const double> weights)
{
    geom.validate();
    if (!(bin_width_ps > 0.0) || bin_width_ps > pulse.fwhm_ps / 4.0)
        throw std::invalid_argument("bin width must be positive and at most FWHM/4");
    if (!weights.empty() && weights.size() != geom.positions.size())
        throw std::invalid_argument("weights must match the CCR count");

    ResponseLayout l;
    l.offsets = ccr_time_offsets(geom, incidence_rad, azimuth_rad);
    for (auto& o : l.offsets)
        o += pulse.center_ps;
    l.weights.assign(weights.begin(), weights.end());
    if (l.weights.empty())
        l.weights.assign(l.offsets.size(), 1.0);
    l.weight_sum = std::accumulate(l.weights.begin(), l.weights.end(), 0.0);
    if (!(l.weight_sum > 0.0))
        throw std::invalid_argument("weights must sum to a positive value");

    const auto [lo, hi] = std::minmax_element(l.offsets.begin(), l.offsets.end());
    const double margin = 5.0 * pulse.fwhm_ps;
    l.origin = std::floor((*lo - margin) / bin_width_ps) * bin_width_ps;
    l.bins = static_cast<std::size_t>(std::ceil((*hi + margin - l.origin) / bin_width_ps));
    l.sigma = pulse.sigma_ps();
    return l;
}

} // namespace detail

TemporalProfile array_impulse_response(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                                       const GaussianPulse& pulse, double bin_width_ps,
                                       std::span<const double> weights)
{
    const auto l = detail::response_layout(geom, incidence_rad, azimuth_rad, pulse, bin_width_ps, weights);
    TemporalProfile p;
    p.bin_width_ps = bin_width_ps;
    p.origin_ps = l.origin;
    p.densities.assign(l.bins, 0.0);

    const double inv = 1.0 / (std::sqrt(2.0) * l.sigma);
    const auto n_bins = static_cast<std::ptrdiff_t>(l.bins);
    const std::size_t n_ccr = l.offsets.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_bins; ++i)
    {
        const double lo = l.origin + static_cast<double>(i) * bin_width_ps;
        const double hi = lo + bin_width_ps;
        double mass = 0.0;
        for (std::size_t j = 0; j < n_ccr; ++j)
            mass += l.weights[j] * 0.5 * (std::erfc((lo - l.offsets[j]) * inv) - std::erfc((hi - l.offsets[j]) * inv));
        p.densities[static_cast<std::size_t>(i)] = mass / (l.weight_sum * bin_width_ps);
    }
    return p;
}

double peak_to_peak(const TemporalProfile& profile, double min_separation_ps, int smoothing_bins)
{
    const auto& v = profile.densities;
    const std::size_t n = v.size();
    if (n == 0)
        return 0.0;

    std::vector<double> s(n);
    const int half = std::max(smoothing_bins, 1) / 2;
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t a = i >= static_cast<std::size_t>(half) ? i - half : 0;
        const std::size_t b = std::min(n - 1, i + half);
        double acc = 0.0;
        for (std::size_t k = a; k <= b; ++k)
            acc += v[k];
        s[i] = acc / static_cast<double>(b - a + 1);
    }

    struct Peak
    {
        double time;
        double height;
    };
    std::vector<Peak> peaks;
    // a peak is a run of equal values strictly above both neighbours
    for (std::size_t i = 0; i < n;)
    {
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i])
            ++j;
        const bool left_lower = i == 0 || s[i - 1] < s[i];
        const bool right_lower = j + 1 == n || s[j + 1] < s[i];
        if (left_lower && right_lower && s[i] > 0.0)
            peaks.push_back({0.5 * (profile.bin_center(i) + profile.bin_center(j)), s[i]});
        i = j + 1;
    }
    if (peaks.size() < 2)
        return 0.0;

    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    const Peak& top = peaks.front();
    for (std::size_t k = 1; k < peaks.size(); ++k)
    {
        if (peaks[k].height < 0.1 * top.height)
            break;
        if (std::abs(peaks[k].time - top.time) >= min_separation_ps)
            return std::abs(peaks[k].time - top.time);
    }
    return 0.0;
}

} // namespace photonlink
