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

#ifndef PHOTONLINK_ANALYSIS_HPP
#define PHOTONLINK_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "photonlink/ccr_response.hpp"
#include "photonlink/channel_sim.hpp"
#include "photonlink/link_budget.hpp"
#include "photonlink/protocol.hpp"
#include "photonlink/scenario.hpp"

namespace photonlink
{

/// Predicted arrival times of the transmitted pulse train.
///
/// A detection is matched to the pulse whose predicted return is nearest, and
/// only if the receive shutter is open and that pulse lies within half a pulse
/// period. Tags outside this region (closed shutter, before the first or
/// after the last return) have no reference.
class ExpectedArrivals
{
  public:
    ExpectedArrivals(ProtocolSchedule schedule, RangeProfile range);

    std::optional<Picoseconds> nearest(Picoseconds t) const;
    Picoseconds arrival(std::int64_t slot) const;
    Picoseconds pulse_period() const { return pulse_period_; }
    const ProtocolSchedule& schedule() const { return schedule_; }

  private:
    ProtocolSchedule schedule_;
    RangeProfile range_;
    Picoseconds pulse_period_;
};

/// Wraps x into (-P/2, P/2].
Picoseconds wrap_residual(Picoseconds x, Picoseconds period);

struct Residual
{
    Picoseconds time = 0;     // detection time
    Picoseconds residual = 0; // detection minus expected arrival
    Truth truth = Truth::unknown;
};

struct ResidualSet
{
    int channel = 0;
    Picoseconds pulse_period = 10'000;
    std::vector<Residual> items;
};

/// Residuals of `channel` against the modelled pulse train. Unmatched tags are dropped.
ResidualSet residuals(std::span<const TagEvent> tags, const ExpectedArrivals& refs, int channel);

/// Residuals against an explicit, sorted list of expected arrivals. Each tag is
/// matched to the nearest reference and wrapped modulo `pulse_period`.
ResidualSet residuals(std::span<const TagEvent> tags, std::span<const Picoseconds> refs, Picoseconds pulse_period,
                      int channel);

struct WindowCounts
{
    std::int64_t total_in_window = 0; // |r| <= w/2
    std::int64_t outside = 0;         // |r| > exclusion
    double background_in_window = 0.0;
    double scale = 0.0; // w / (P - 2 exclusion)
};

WindowCounts windowed_counts(std::span<const Residual> rs, Picoseconds pulse_period, double window_ps,
                             double exclusion_ps);

struct IntervalStats
{
    std::int64_t k = 0;
    double tau_s = 0.0;
    std::int64_t n_tot_w = 0;
    double n_bkg_w = 0.0;
    double n_det = 0.0;
    double r_det_hz = 0.0;
    double bkg_rate_w_hz = 0.0;
    double snr = 0.0;
    double live_s = 0.0;     // tau * duty cycle
    double var_n_det = 0.0;  // Poisson variance of n_det
    double var_n_bkg = 0.0;  // variance of the scaled background estimate
    std::int64_t n_signal_truth_w = 0; // truth-tagged signal counts in window, when known
    bool selected = false;
};

/// Splits [0, duration) into intervals of `params.interval_s` (a trailing
/// partial interval is dropped) and computes window statistics in each.
std::vector<IntervalStats> interval_stats(const ResidualSet& rs, double duration_s, const AnalysisParams& params);

/// Marks intervals with R_det >= threshold and returns them.
std::vector<IntervalStats> filter_intervals(std::span<IntervalStats> stats, double threshold_hz);

struct Histogram
{
    double bin_width_ps = 100.0;
    double first_edge_ps = 0.0;
    std::vector<std::int64_t> counts;

    double edge(std::size_t i) const { return first_edge_ps + static_cast<double>(i) * bin_width_ps; }
    std::int64_t total() const;
    TemporalProfile as_profile() const;
};

/// Residual histogram with a bin edge at zero covering (-P/2, P/2]. If
/// `intervals` is non-empty only residuals inside selected intervals count.
Histogram residual_histogram(const ResidualSet& rs, double bin_width_ps, std::span<const IntervalStats> intervals = {},
                             double interval_s = 0.0);

struct PassSummary
{
    bool no_signal = true;
    std::size_t intervals_total = 0;
    std::size_t intervals_selected = 0;
    double r_det_hz = 0.0;
    double r_det_sigma_hz = 0.0;
    double snr = 0.0;
    double snr_sigma = 0.0;
    double mu_sat = 0.0;
    double mu_sat_sigma = 0.0;
};

/// Mean R_det over the selection, SNR as the ratio of summed counts, and mu_sat
/// through the link budget. An empty selection gives `no_signal`.
PassSummary estimate_pass_summary(std::span<const IntervalStats> selected, const LinkBudget& budget,
                                  double rep_rate_hz, std::size_t intervals_total = 0);

/// Detection rate across the protocol period, split by shutter state and
/// whether returns are expected.
struct PeriodOccupancy
{
    double bin_width_ms = 1.0;
    double periods = 0.0;
    std::vector<double> closed_hz;
    std::vector<double> signal_region_hz;
    std::vector<double> open_other_hz;
};

PeriodOccupancy period_occupancy(std::span<const TagEvent> tags, const ProtocolSchedule& schedule, Picoseconds rtt,
                                 double duration_s, double bin_width_ms = 1.0, std::optional<int> channel = {});

/// Convenience pipeline: residuals, intervals, selection, histogram and summary for one channel.
struct ChannelAnalysis
{
    int channel = 0;
    ResidualSet residuals;
    std::vector<IntervalStats> intervals;
    Histogram histogram;
    PassSummary summary;
};

ChannelAnalysis analyze_channel(std::span<const TagEvent> tags, const Scenario& scenario, int channel,
                                double duration_s);

namespace serial
{
ResidualSet residuals(std::span<const TagEvent> tags, const ExpectedArrivals& refs, int channel);
std::vector<IntervalStats> interval_stats(const ResidualSet& rs, double duration_s, const AnalysisParams& params);
} // namespace serial

} // namespace photonlink

#endif
