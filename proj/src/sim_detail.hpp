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

#ifndef PHOTONLINK_SIM_DETAIL_HPP
#define PHOTONLINK_SIM_DETAIL_HPP

#include <cstdint>
#include <vector>

#include "photonlink/channel_sim.hpp"

namespace photonlink::detail
{

struct ChannelPlan
{
    int channel = 0;
    double t_rx = 1.0;
    double p_max = 0.0;
    double optical_scale = 1.0; // albedo and fluorescence relative to receiver 0
    double dark_hz = 0.0;
    double jitter_sigma_ps = 0.0;
};

// Everything the per-period kernel needs, resolved once per pass.
struct SimPlan
{
    const Scenario* scenario = nullptr;
    std::uint64_t seed = 0;
    Picoseconds period = 0;
    Picoseconds pulse_period = 0;
    Picoseconds duration = 0;
    std::int64_t n_periods = 0;

    std::vector<double> offsets_ps;
    double pulse_sigma_ps = 0.0;
    double fluo_peak_hz = 0.0;
    double fluo_decay_per_s = 0.0;
    std::vector<ChannelPlan> channels;
};

SimPlan make_sim_plan(const Scenario& scenario, double duration_s, std::uint64_t seed);

// Appends the events generated by protocol period `m`. Events may spill into
// the following period; the caller sorts the merged output.
void simulate_period(const SimPlan& plan, std::int64_t m, std::vector<TagEvent>& out);

TagStream finalize_stream(const SimPlan& plan, std::vector<std::vector<TagEvent>>&& per_period);

} // namespace photonlink::detail

#endif
