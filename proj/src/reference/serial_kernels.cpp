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

// Single-threaded reference versions of the OpenMP kernels. They are kept
// deliberately plain and are what the parallel code is tested against.

#include <cmath>

#include "../analysis_detail.hpp"
#include "../response_detail.hpp"
#include "../sim_detail.hpp"
#include "photonlink/analysis.hpp"
#include "photonlink/ccr_response.hpp"
#include "photonlink/channel_sim.hpp"

namespace photonlink::serial
{

TemporalProfile array_impulse_response(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                                       const GaussianPulse& pulse, double bin_width_ps,
                                       std::span<const double> weights)
{
    const auto l = detail::response_layout(geom, incidence_rad, azimuth_rad, pulse, bin_width_ps, weights);
    TemporalProfile p;
    p.bin_width_ps = bin_width_ps;
    p.origin_ps = l.origin;
    p.densities.assign(l.bins, 0.0);

    // scatter each CCR's pulse into the bins
    for (std::size_t j = 0; j < l.offsets.size(); ++j)
    {
        const GaussianPulse g(pulse.fwhm_ps, l.offsets[j]);
        double lower = g.cdf(l.origin);
        for (std::size_t i = 0; i < l.bins; ++i)
        {
            const double upper = g.cdf(l.origin + static_cast<double>(i + 1) * bin_width_ps);
            p.densities[i] += l.weights[j] * (upper - lower);
            lower = upper;
        }
    }
    for (auto& d : p.densities)
        d /= l.weight_sum * bin_width_ps;
    return p;
}

TagStream simulate_pass(const Scenario& scenario, double duration_s, std::uint64_t seed)
{
    const auto plan = detail::make_sim_plan(scenario, duration_s, seed);
    std::vector<std::vector<TagEvent>> per_period(static_cast<std::size_t>(plan.n_periods));
    for (std::int64_t m = 0; m < plan.n_periods; ++m)
        detail::simulate_period(plan, m, per_period[static_cast<std::size_t>(m)]);
    return detail::finalize_stream(plan, std::move(per_period));
}

ResidualSet residuals(std::span<const TagEvent> tags, const ExpectedArrivals& refs, int channel)
{
    ResidualSet out;
    out.channel = channel;
    out.pulse_period = refs.pulse_period();
    for (const auto& e : tags)
    {
        if (e.channel != channel)
            continue;
        if (const auto ref = refs.nearest(e.time))
            out.items.push_back({e.time, wrap_residual(e.time - *ref, out.pulse_period), e.truth});
    }
    return out;
}

std::vector<IntervalStats> interval_stats(const ResidualSet& rs, double duration_s, const AnalysisParams& params)
{
    detail::validate_interval_inputs(rs, duration_s, params);
    const std::size_t n = detail::interval_count(duration_s, params.interval_s);
    const auto tau = static_cast<Picoseconds>(std::llround(params.interval_s * 1e12));
    const double half = 0.5 * params.window_ps;
    const double scale = params.window_ps / (static_cast<double>(rs.pulse_period) - 2.0 * params.exclusion_ps);

    std::vector<std::int64_t> tot(n, 0), out(n, 0), sig(n, 0);
    for (const auto& r : rs.items)
    {
        if (r.time < 0)
            continue;
        const auto k = static_cast<std::size_t>(r.time / tau);
        if (k >= n)
            continue;
        const double a = std::abs(static_cast<double>(r.residual));
        if (a <= half)
        {
            ++tot[k];
            sig[k] += r.truth == Truth::signal;
        }
        else if (a > params.exclusion_ps)
            ++out[k];
    }
    std::vector<IntervalStats> stats;
    stats.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        stats.push_back(detail::make_interval(static_cast<std::int64_t>(k), tot[k], out[k], sig[k], scale, params));
    return stats;
}

} // namespace photonlink::serial
