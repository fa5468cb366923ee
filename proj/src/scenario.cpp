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

#include "photonlink/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "photonlink/tag_io.hpp"

namespace photonlink
{

namespace
{

using nlohmann::json;

/// View of one JSON object that remembers which keys were read, so unknown
/// (usually misspelt) keys can be reported.
class Section
{
  public:
    Section(const json* j, std::string path) : j_(j), path_(std::move(path))
    {
        if (j_ && !j_->is_object())
            throw ConfigError(path_, "expected an object");
    }

    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

    bool has(const std::string& name)
    {
        used_.insert(name);
        return j_ && j_->contains(name) && !(*j_)[name].is_null();
    }

    const json& raw(const std::string& name) const { return (*j_)[name]; }

    double number(const std::string& name, double fallback, const std::function<bool(double)>& ok = {},
                  const char* requirement = nullptr)
    {
        if (!has(name))
            return fallback;
        const auto& v = raw(name);
        if (!v.is_number())
            throw ConfigError(key(name), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || (ok && !ok(x)))
            throw ConfigError(key(name), requirement ? requirement : "value out of range");
        return x;
    }

    int integer(const std::string& name, int fallback, int min_value)
    {
        if (!has(name))
            return fallback;
        const auto& v = raw(name);
        if (!v.is_number_integer())
            throw ConfigError(key(name), "expected an integer");
        const auto x = v.get<long long>();
        if (x < min_value || x > 1'000'000)
            throw ConfigError(key(name), "must be at least " + std::to_string(min_value));
        return static_cast<int>(x);
    }

    std::string string(const std::string& name, const std::string& fallback)
    {
        if (!has(name))
            return fallback;
        const auto& v = raw(name);
        if (!v.is_string())
            throw ConfigError(key(name), "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& name, bool fallback)
    {
        if (!has(name))
            return fallback;
        const auto& v = raw(name);
        if (!v.is_boolean())
            throw ConfigError(key(name), "expected true or false");
        return v.get<bool>();
    }

    Section child(const std::string& name)
    {
        if (!has(name))
            return Section(nullptr, key(name));
        return Section(&raw(name), key(name));
    }

    void finish() const
    {
        if (!j_)
            return;
        for (const auto& [k, v] : j_->items())
            if (!used_.count(k))
                throw ConfigError(key(k), "unknown key");
    }

  private:
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

auto positive = [](double x) { return x > 0.0; };
auto non_negative = [](double x) { return x >= 0.0; };
auto fraction = [](double x) { return x > 0.0 && x <= 1.0; };

constexpr const char* kPositive = "must be positive";
constexpr const char* kNonNegative = "must not be negative";
constexpr const char* kFraction = "must lie in (0, 1]";

json parse_json(const std::string& text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref)
{
    std::filesystem::path p(ref);
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ReceiverSpec parse_receiver(Section s, std::size_t index)
{
    ReceiverSpec rx;
    rx.name = s.string("name", "rx" + std::to_string(index));
    rx.channel_id = s.integer("channel", static_cast<int>(index), 0);
    rx.optics_loss = LossDb(s.number("optics_loss_db", rx.optics_loss.value(), non_negative, kNonNegative));
    rx.detector_efficiency = s.number("detector_efficiency", rx.detector_efficiency, fraction, kFraction);
    rx.dark_rate_hz = s.number("dark_rate_hz", rx.dark_rate_hz, non_negative, kNonNegative);
    rx.jitter_fwhm_ps = s.number("jitter_fwhm_ps", rx.jitter_fwhm_ps, positive, kPositive);
    rx.filter_band_nm = s.number("filter_band_nm", rx.filter_band_nm, positive, kPositive);
    s.finish();
    return rx;
}

// Re-raises a model-level validation failure against the section it came from.
template <class F>
void checked(const std::string& key, F&& f)
{
    try
    {
        f();
    }
    catch (const ConfigError&)
    {
        throw;
    }
    catch (const DataError& e)
    {
        throw ConfigError(key, e.what());
    }
    catch (const std::logic_error& e)
    {
        throw ConfigError(key, e.what());
    }
}

} // namespace

void AnalysisParams::validate(double pulse_period_ps) const
{
    if (!(interval_s > 0.0))
        throw ConfigError("analysis.interval_s", kPositive);
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0))
        throw ConfigError("analysis.duty_cycle", kFraction);
    if (!(bin_width_ps > 0.0))
        throw ConfigError("analysis.bin_width_ps", kPositive);
    if (!(threshold_hz >= 0.0))
        throw ConfigError("analysis.threshold_hz", kNonNegative);
    if (!(exclusion_ps > 0.0 && exclusion_ps < 0.5 * pulse_period_ps))
        throw ConfigError("analysis.exclusion_ps", "must lie in (0, pulse_period/2)");
    if (!(window_ps > 0.0 && window_ps < 2.0 * exclusion_ps))
        throw ConfigError("analysis.window_ps", "must lie in (0, 2 * exclusion_ps)");
}

void Scenario::validate() const
{
    checked("satellite", [&] { array.validate(); });
    checked("satellite", [&] { geometry.validate(); });
    checked("protocol", [&] { schedule.validate(); });
    checked("noise", [&] { noise.validate(); });
    analysis.validate(static_cast<double>(schedule.pulse_period_ps()));
    if (!(wavelength_m > 0.0))
        throw ConfigError("geometry.wavelength_nm", kPositive);
    if (!(incidence_rad >= 0.0 && incidence_rad < 0.5 * kPi))
        throw ConfigError("geometry.incidence_deg", "must lie in [0, 90)");
    if (!(rep_rate_hz > 0.0))
        throw ConfigError("transmitter.rep_rate_hz", kPositive);
    if (std::abs(1e9 / rep_rate_hz - schedule.pulse_period_ns) > 1e-9 * schedule.pulse_period_ns)
        throw ConfigError("transmitter.rep_rate_hz", "inconsistent with protocol pulse period");
    if (!(pulse_fwhm_ps > 0.0))
        throw ConfigError("transmitter.pulse_fwhm_ps", kPositive);
    if (!(mu_sat >= 0.0))
        throw ConfigError("transmitter.mu_sat", kNonNegative);
    if (!(dead_time_ps >= 0.0))
        throw ConfigError("dead_time_ns", kNonNegative);
    if (receivers.empty())
        throw ConfigError("receivers", "at least one receiver is required");
    std::set<int> ids;
    for (std::size_t i = 0; i < receivers.size(); ++i)
    {
        const std::string key = "receivers[" + std::to_string(i) + "]";
        checked(key, [&] { receivers[i].validate(); });
        if (!ids.insert(receivers[i].channel_id).second)
            throw ConfigError(key + ".channel", "duplicate channel id");
    }
}

double Scenario::azimuth() const
{
    return azimuth_rad ? *azimuth_rad : max_spread_azimuth(geometry);
}

double Scenario::mean_range_m(double duration_s) const
{
    return duration_s > 0.0 ? range.mean_range(0.0, duration_s) : range.range_at(0.0);
}

DownlinkGeometry Scenario::downlink_geometry(double range_m) const
{
    DownlinkGeometry g;
    g.wavelength_m = wavelength_m;
    g.telescope = telescope;
    g.slant_range_m = range_m;
    g.array = array;
    return g;
}

LinkBudget Scenario::budget(std::size_t receiver, double range_m, std::optional<DiffractionModel> m) const
{
    if (receiver >= receivers.size())
        throw std::out_of_range("receiver index out of range");
    return downlink_budget(downlink_geometry(range_m), m.value_or(model), atmosphere_loss,
                           receiver_transmittance(receivers[receiver]));
}

std::size_t Scenario::receiver_index(int channel_id) const
{
    for (std::size_t i = 0; i < receivers.size(); ++i)
        if (receivers[i].channel_id == channel_id)
            return i;
    throw std::invalid_argument("no receiver with channel id " + std::to_string(channel_id));
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<RangeSample> read_range_csv(const std::filesystem::path& path)
{
    std::istringstream in(slurp(path));
    const auto rows = csv::read_table(in, {"t_s", "range_m"});
    std::vector<RangeSample> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({csv::to_double(r[0]), csv::to_double(r[1])});
    return out;
}

std::vector<Point2> read_geometry_csv(const std::filesystem::path& path)
{
    std::istringstream in(slurp(path));
    const auto rows = csv::read_table(in, {"x_m", "y_m"});
    std::vector<Point2> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({csv::to_double(r[0]), csv::to_double(r[1])});
    return out;
}

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir)
{
    const json root = parse_json(json_text);
    Section top(&root, "");
    Scenario sc;
    std::string hashed = root.dump();

    sc.name = top.string("name", sc.name);

    // geometry
    {
        auto g = top.child("geometry");
        sc.wavelength_m = g.number("wavelength_nm", 532.0, positive, kPositive) * 1e-9;
        checked(g.key("telescope_diameter_m"),
                [&] { sc.telescope = Telescope(g.number("telescope_diameter_m", 1.5, positive, kPositive)); });
        const bool has_const = g.has("slant_range_km");
        const bool has_csv = g.has("range_profile_csv");
        if (has_const && has_csv)
            throw ConfigError(g.key("range_profile_csv"), "give either slant_range_km or range_profile_csv");
        if (has_csv)
        {
            const auto file = resolve(base_dir, g.string("range_profile_csv", ""));
            checked(g.key("range_profile_csv"), [&] {
                sc.range = RangeProfile(read_range_csv(file));
                hashed += slurp(file);
            });
        }
        else
        {
            const double km = g.number("slant_range_km", 19'500.0, positive, kPositive);
            sc.range = RangeProfile::constant(km * 1e3);
        }
        if (g.boolean("require_gnss_range", true))
            checked(has_csv ? g.key("range_profile_csv") : g.key("slant_range_km"), [&] { sc.range.validate_gnss(); });
        sc.atmosphere_loss = LossDb(g.number("atmosphere_loss_db", 0.4, non_negative, kNonNegative));
        sc.incidence_rad =
            g.number("incidence_deg", 0.0, [](double x) { return x >= 0.0 && x < 90.0; }, "must lie in [0, 90)") *
            kPi / 180.0;
        if (g.has("azimuth_deg"))
            sc.azimuth_rad = g.number("azimuth_deg", 0.0) * kPi / 180.0;
        checked(g.key("diffraction_model"),
                [&] { sc.model = parse_diffraction_model(g.string("diffraction_model", "ffdp")); });
        g.finish();
    }

    // satellite
    {
        auto s = top.child("satellite");
        auto& a = sc.array;
        a.ccr.diameter_m = s.number("ccr_diameter_mm", 26.0, positive, kPositive) * 1e-3;
        a.ccr.reflectivity = s.number("reflectivity", 0.93, fraction, kFraction);
        a.ccr.coated = s.boolean("coated", false);
        checked(s.key("shape"), [&] { a.shape = parse_array_shape(s.string("shape", "ring")); });
        a.count = s.integer("ccr_count", kDefaultRingCount, 1);
        a.outer_diameter_m = s.number("outer_diameter_m", kDefaultRingDiameter_m, non_negative, kNonNegative);
        a.inner_diameter_m = s.number("inner_diameter_m", 0.0, non_negative, kNonNegative);
        a.width_m = s.number("width_m", 0.0, non_negative, kNonNegative);
        a.height_m = s.number("height_m", 0.0, non_negative, kNonNegative);
        a.effective_area_m2 = s.number("effective_area_m2", a.count * a.ccr.area_m2(), positive, kPositive);
        a.cross_section_m2 = s.number("cross_section_m2", 0.0, positive, kPositive);
        if (s.has("geometry_csv"))
        {
            const auto file = resolve(base_dir, s.string("geometry_csv", ""));
            checked(s.key("geometry_csv"), [&] {
                sc.geometry.shape = a.shape;
                sc.geometry.positions = read_geometry_csv(file);
                sc.geometry.outer_diameter_m = a.outer_diameter_m;
                sc.geometry.width_m = a.width_m;
                sc.geometry.height_m = a.height_m;
                sc.geometry.validate();
                hashed += slurp(file);
            });
            a.count = static_cast<int>(sc.geometry.positions.size());
        }
        else
        {
            checked(s.key("shape"), [&] { sc.geometry = geometry_from_spec(a); });
        }
        checked("satellite", [&] { a.validate(); });
        s.finish();
    }

    // transmitter
    {
        auto t = top.child("transmitter");
        sc.rep_rate_hz = t.number("rep_rate_hz", 100e6, positive, kPositive);
        sc.pulse_fwhm_ps = t.number("pulse_fwhm_ps", 100.0, positive, kPositive);
        sc.mu_sat = t.number("mu_sat", 15.0, non_negative, kNonNegative);
        t.finish();
    }

    // receivers
    if (top.has("receivers"))
    {
        const auto& list = top.raw("receivers");
        if (!list.is_array() || list.empty())
            throw ConfigError("receivers", "expected a non-empty array");
        sc.receivers.clear();
        for (std::size_t i = 0; i < list.size(); ++i)
            sc.receivers.push_back(parse_receiver(Section(&list[i], "receivers[" + std::to_string(i) + "]"), i));
    }
    sc.dead_time_ps = top.number("dead_time_ns", 0.0, non_negative, kNonNegative) * 1e3;

    // protocol
    {
        auto p = top.child("protocol");
        auto& s = sc.schedule;
        s.period_ms = p.number("period_ms", s.period_ms, positive, kPositive);
        s.tx_start_ms = p.number("tx_start_ms", s.tx_start_ms, non_negative, kNonNegative);
        s.tx_end_ms = p.number("tx_end_ms", s.tx_end_ms, positive, kPositive);
        s.slr_fire_ms = p.number("slr_fire_ms", s.slr_fire_ms, non_negative, kNonNegative);
        s.rx_open_ms = p.number("rx_open_ms", s.rx_open_ms, non_negative, kNonNegative);
        s.rx_close_ms = p.number("rx_close_ms", s.rx_close_ms, positive, kPositive);
        s.duty_cycle = p.number("duty_cycle", s.duty_cycle, fraction, kFraction);
        s.pulse_period_ns = 1e9 / sc.rep_rate_hz;
        checked("protocol", [&] { s.validate(); });
        p.finish();
    }

    // noise
    {
        auto n = top.child("noise");
        sc.noise.fluorescence_hz = n.number("fluorescence_hz", sc.noise.fluorescence_hz, non_negative, kNonNegative);
        sc.noise.fluorescence_half_life_ms =
            n.number("fluorescence_half_life_ms", sc.noise.fluorescence_half_life_ms, positive, kPositive);
        sc.noise.albedo_hz = n.number("albedo_hz", sc.noise.albedo_hz, non_negative, kNonNegative);
        n.finish();
    }
    sc.noise.dark_rate_hz = sc.receivers.front().dark_rate_hz;

    // analysis
    {
        auto a = top.child("analysis");
        auto& p = sc.analysis;
        p.interval_s = a.number("interval_s", p.interval_s, positive, kPositive);
        p.window_ps = a.number("window_ps", p.window_ps, positive, kPositive);
        p.duty_cycle = a.number("duty_cycle", sc.schedule.duty_cycle, fraction, kFraction);
        p.threshold_hz = a.number("threshold_hz", p.threshold_hz, non_negative, kNonNegative);
        p.bin_width_ps = a.number("bin_width_ps", p.bin_width_ps, positive, kPositive);
        p.exclusion_ps = a.number("exclusion_ps", p.exclusion_ps, positive, kPositive);
        a.finish();
    }

    top.finish();
    sc.validate();
    sc.hash = fnv1a64(hashed);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::string text;
    try
    {
        text = slurp(path);
    }
    catch (const DataError& e)
    {
        throw ConfigError("", e.what());
    }
    try
    {
        return parse_scenario(text, path.parent_path());
    }
    catch (const ConfigError& e)
    {
        throw ConfigError(e.key(), path.filename().string() + ": " +
                                       (e.key().empty() ? std::string(e.what())
                                                        : std::string(e.what()).substr(e.key().size() + 2)));
    }
}

Scenario baseline_scenario()
{
    // Glonass-134 pass: 19500 km, 5 degree incidence on the derived 0.42 m ring.
    static const char* const kBaseline = R"({
  "name": "glonass134_19500km",
  "geometry": {
    "wavelength_nm": 532,
    "telescope_diameter_m": 1.5,
    "slant_range_km": 19500,
    "atmosphere_loss_db": 0.4,
    "incidence_deg": 5,
    "diffraction_model": "ffdp"
  },
  "satellite": {
    "shape": "ring",
    "ccr_count": 36,
    "ccr_diameter_mm": 26,
    "reflectivity": 0.93,
    "coated": false,
    "outer_diameter_m": 0.42,
    "effective_area_m2": 0.015,
    "cross_section_m2": 2.6046e7
  },
  "transmitter": { "rep_rate_hz": 1e8, "pulse_fwhm_ps": 100, "mu_sat": 14.5 },
  "receivers": [
    { "name": "SPAD", "channel": 0, "optics_loss_db": 8.8, "detector_efficiency": 0.5,
      "dark_rate_hz": 700, "jitter_fwhm_ps": 40, "filter_band_nm": 3 }
  ],
  "protocol": { "period_ms": 200, "tx_start_ms": 0, "tx_end_ms": 100, "slr_fire_ms": 100,
                "rx_open_ms": 105, "rx_close_ms": 190, "duty_cycle": 0.3 },
  "noise": { "fluorescence_hz": 195, "fluorescence_half_life_ms": 5, "albedo_hz": 1900 },
  "analysis": { "interval_s": 5, "window_ps": 400, "duty_cycle": 0.3, "threshold_hz": 30,
                "bin_width_ps": 100, "exclusion_ps": 1000 }
})";
    return parse_scenario(kBaseline);
}

ProjectionBaseline baseline_from_scenario(const Scenario& sc)
{
    ProjectionBaseline b;
    const double range = sc.mean_range_m(0.0);
    const LinkBudget lb = sc.budget(0, range);
    b.mu_sat = sc.mu_sat;
    b.rep_rate_hz = sc.rep_rate_hz;
    b.r_det_hz = forward_detection_rate(sc.mu_sat, sc.rep_rate_hz, lb.t_down, lb.t_rx);
    b.dark_hz = sc.receivers.front().dark_rate_hz;
    b.fluorescence_hz = sc.noise.fluorescence_hz;
    b.albedo_hz = sc.noise.albedo_hz;
    b.window_ps = sc.analysis.window_ps;
    b.filter_band_nm = sc.receivers.front().filter_band_nm;
    return b;
}

PlanFile parse_plan(const std::string& json_text, const Scenario& scenario)
{
    const json root = parse_json(json_text);
    Section top(&root, "");
    PlanFile pf;
    pf.baseline = baseline_from_scenario(scenario);

    {
        auto b = top.child("baseline");
        auto& base = pf.baseline;
        base.r_det_hz = b.number("r_det_hz", base.r_det_hz, non_negative, kNonNegative);
        base.mu_sat = b.number("mu_sat", base.mu_sat, positive, kPositive);
        base.dark_hz = b.number("dark_rate_hz", base.dark_hz, non_negative, kNonNegative);
        base.fluorescence_hz = b.number("fluorescence_hz", base.fluorescence_hz, non_negative, kNonNegative);
        base.albedo_hz = b.number("albedo_hz", base.albedo_hz, non_negative, kNonNegative);
        base.window_ps = b.number("window_ps", base.window_ps, positive, kPositive);
        base.rep_rate_hz = b.number("rep_rate_hz", base.rep_rate_hz, positive, kPositive);
        base.filter_band_nm = b.number("filter_band_nm", base.filter_band_nm, positive, kPositive);
        b.finish();
    }

    // Keys the file leaves out keep the baseline value.
    auto& p = pf.plan;
    p = UpgradePlan::identity(pf.baseline);
    p.source_mu = top.number("source_mu", p.source_mu, positive, kPositive);
    p.tx_divergence_semi_angle_rad =
        top.number("tx_divergence_semi_angle_urad", p.tx_divergence_semi_angle_rad * 1e6, positive, kPositive) * 1e-6;
    p.diffraction_gain = LossDb(top.number("diffraction_gain_db", p.diffraction_gain.value(), non_negative, kNonNegative));
    p.bs_removal_signal_factor =
        top.number("bs_removal_signal_factor", p.bs_removal_signal_factor, positive, kPositive);
    p.filter_band_nm = top.number("filter_band_nm", p.filter_band_nm, positive, kPositive);
    p.albedo_scale = top.number("albedo_scale", p.albedo_scale, positive, kPositive);
    p.fluorescence_removed = top.boolean("fluorescence_removed", p.fluorescence_removed);
    p.dark_rate_hz = top.number("dark_rate_hz", p.dark_rate_hz, non_negative, kNonNegative);
    p.window_ps = top.number("window_ps", p.window_ps, positive, kPositive);
    p.rep_rate_hz = top.number("rep_rate_hz", p.rep_rate_hz, positive, kPositive);
    top.string("name", "");
    top.finish();
    if (p.window_ps > 1e12 / p.rep_rate_hz)
        throw ConfigError("window_ps", "longer than the projected pulse period");
    return pf;
}

PlanFile load_plan(const std::filesystem::path& path, const Scenario& scenario)
{
    std::string text;
    try
    {
        text = slurp(path);
    }
    catch (const DataError& e)
    {
        throw ConfigError("", e.what());
    }
    return parse_plan(text, scenario);
}

} // namespace photonlink
