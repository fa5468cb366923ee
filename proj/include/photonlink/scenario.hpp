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

#ifndef PHOTONLINK_SCENARIO_HPP
#define PHOTONLINK_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonlink/ccr_response.hpp"
#include "photonlink/link_budget.hpp"
#include "photonlink/protocol.hpp"

namespace photonlink
{

/// Raised for malformed or inconsistent configuration. `key` is the dotted
/// JSON path that caused it.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

  private:
    std::string key_;
};

/// Raised for unreadable input data (tag files, CSV tables).
class DataError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct AnalysisParams
{
    double interval_s = 5.0;
    double window_ps = 400.0;
    double duty_cycle = 0.3;
    double threshold_hz = 30.0;
    double bin_width_ps = 100.0;
    double exclusion_ps = 1000.0;

    void validate(double pulse_period_ps) const;
};

/// One satellite pass: link geometry, array, transmitter, receivers, protocol,
/// background and analysis settings.
struct Scenario
{
    std::string name = "scenario";

    double wavelength_m = 532e-9;
    Telescope telescope{1.5};
    RangeProfile range;
    LossDb atmosphere_loss{0.4};
    DiffractionModel model = DiffractionModel::ffdp;

    CcrArraySpec array;
    ArrayGeometry geometry;
    double incidence_rad = 0.0;
    std::optional<double> azimuth_rad; // unset: direction of maximum spread

    double rep_rate_hz = 100e6;
    double pulse_fwhm_ps = 100.0;
    double mu_sat = 15.0;

    std::vector<ReceiverSpec> receivers{ReceiverSpec{}};
    ProtocolSchedule schedule;
    NoiseModel noise;
    AnalysisParams analysis;
    double dead_time_ps = 0.0;

    std::uint64_t hash = 0;

    void validate() const;

    double azimuth() const;
    double mean_range_m(double duration_s) const;
    DownlinkGeometry downlink_geometry(double range_m) const;
    /// Budget of `model` at `range_m` for receiver index `receiver`.
    LinkBudget budget(std::size_t receiver, double range_m, std::optional<DiffractionModel> model = {}) const;
    /// Index into `receivers` of the channel id, or throws.
    std::size_t receiver_index(int channel_id) const;
};

/// Loads a scenario JSON; relative CSV references resolve against the file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});

/// Built-in Glonass-134 style baseline at 19500 km.
Scenario baseline_scenario();

std::vector<RangeSample> read_range_csv(const std::filesystem::path& path);
std::vector<Point2> read_geometry_csv(const std::filesystem::path& path);

struct PlanFile
{
    ProjectionBaseline baseline;
    UpgradePlan plan;
};

/// Reads an upgrade plan. Baseline values missing from the file come from the scenario.
PlanFile load_plan(const std::filesystem::path& path, const Scenario& scenario);
PlanFile parse_plan(const std::string& json_text, const Scenario& scenario);
ProjectionBaseline baseline_from_scenario(const Scenario& scenario);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace photonlink

#endif
