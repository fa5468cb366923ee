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

#ifndef PHOTONLINK_PROTOCOL_HPP
#define PHOTONLINK_PROTOCOL_HPP

#include <cstdint>
#include <vector>

#include "photonlink/units.hpp"

namespace photonlink
{

/// Two-way shutter protocol, repeated every `period_ms`. Transmission runs in
/// [tx_start, tx_end), the receive shutter is open in [rx_open, rx_close).
struct ProtocolSchedule
{
    double period_ms = 200.0;
    double tx_start_ms = 0.0;
    double tx_end_ms = 100.0;
    double slr_fire_ms = 100.0;
    double rx_open_ms = 105.0;
    double rx_close_ms = 180.0;
    double pulse_period_ns = 10.0;
    double duty_cycle = 0.3;

    void validate() const;

    Picoseconds period_ps() const;
    Picoseconds pulse_period_ps() const;
    Picoseconds tx_start_ps() const;
    Picoseconds tx_end_ps() const;
    Picoseconds slr_fire_ps() const;
    Picoseconds rx_open_ps() const;
    Picoseconds rx_close_ps() const;

    /// Phase of `t` inside its protocol period, in [0, period).
    Picoseconds phase(Picoseconds t) const;
    bool rx_open_at(Picoseconds t) const;
    /// True if the pulse slot with global index k is emitted inside a tx window.
    bool is_tx_slot(std::int64_t slot) const;
};

struct RangeSample
{
    double t_s = 0.0;
    double range_m = 0.0;
};

/// Slant range against elapsed acquisition time, linearly interpolated and
/// held constant outside the sampled span.
class RangeProfile
{
  public:
    RangeProfile() : RangeProfile(constant(19'500e3)) {}
    explicit RangeProfile(std::vector<RangeSample> samples);

    static RangeProfile constant(double range_m);

    double range_at(double t_s) const;
    double min_range(double t0_s, double t1_s) const;
    double mean_range(double t0_s, double t1_s) const;

    /// Throws unless every sample lies in the GNSS band [19000, 26000] km.
    void validate_gnss() const;

    const std::vector<RangeSample>& samples() const { return samples_; }

  private:
    std::vector<RangeSample> samples_;
};

/// Two-way light time for a slant range, rounded to the tagger resolution.
Picoseconds round_trip_ps(double range_m);

/// Background processes. Rates are referred to the reference receiver
/// channel; fluorescence is the average over the region where returns arrive.
struct NoiseModel
{
    double dark_rate_hz = 700.0;
    double fluorescence_hz = 195.0;
    double fluorescence_half_life_ms = 5.0;
    double albedo_hz = 1900.0;

    void validate() const;
};

} // namespace photonlink

#endif
