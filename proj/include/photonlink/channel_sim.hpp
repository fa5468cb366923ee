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

#ifndef PHOTONLINK_CHANNEL_SIM_HPP
#define PHOTONLINK_CHANNEL_SIM_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "photonlink/protocol.hpp"
#include "photonlink/scenario.hpp"

namespace photonlink
{

enum class Truth : std::uint8_t
{
    signal = 0,
    dark = 1,
    fluorescence = 2,
    albedo = 3,
    unknown = 4
};

inline constexpr std::size_t kTruthClasses = 4;

std::string_view to_string(Truth t);
Truth parse_truth(std::string_view name);

struct TagEvent
{
    Picoseconds time = 0;
    int channel = 0;
    Truth truth = Truth::unknown;

    friend bool operator==(const TagEvent&, const TagEvent&) = default;
};

struct StreamMetadata
{
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::array<std::int64_t, kTruthClasses> class_counts{};
    std::map<int, std::int64_t> channel_counts;
};

/// Detection events sorted by time (ties by channel, then truth class).
struct TagStream
{
    std::vector<TagEvent> events;
    StreamMetadata metadata;
};

/// Fraction of the protocol period during which returns of the tx window,
/// delayed by `rtt_ms` and wrapped modulo the period, meet the open rx shutter.
double effective_duty_cycle(const ProtocolSchedule& schedule, double rtt_ms);

/// Expected arrival of the pulse in global slot `pulse_index` (emitted at
/// index * pulse_period from acquisition start). Throws for slots outside a tx window.
Picoseconds expected_arrival(std::int64_t pulse_index, const RangeProfile& profile,
                             const ProtocolSchedule& schedule);

/// Open-shutter interval, relative to the period start, where returns of the
/// tx window are expected for round-trip `rtt`. Empty if begin >= end.
struct SignalRegion
{
    Picoseconds begin = 0;
    Picoseconds end = 0;
};
SignalRegion signal_region(const ProtocolSchedule& schedule, Picoseconds rtt);

/// Fluorescence rate just after the SLR pulse, such that its mean over the
/// signal region equals noise.fluorescence_hz.
double fluorescence_peak_rate(const NoiseModel& noise, const ProtocolSchedule& schedule, Picoseconds rtt);

/// Synthetic acquisition: Poisson signal per pulse, dark counts at all times,
/// albedo and fluorescence while the receive shutter is open. Deterministic
/// in (scenario, duration, seed) and independent of the thread count.
TagStream simulate_pass(const Scenario& scenario, double duration_s, std::uint64_t seed);

namespace serial
{
TagStream simulate_pass(const Scenario& scenario, double duration_s, std::uint64_t seed);
}

} // namespace photonlink

#endif
