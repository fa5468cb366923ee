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

#include "photonlink/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "photonlink/analysis.hpp"
#include "photonlink/ccr_response.hpp"
#include "photonlink/channel_sim.hpp"
#include "photonlink/link_budget.hpp"
#include "photonlink/scenario.hpp"
#include "photonlink/tag_io.hpp"

namespace photonlink
{

namespace
{

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Options
{
    std::string scenario;
    std::string out;
    std::string model;
    std::string tags;
    std::string plan;
    std::string incidences = "0,5,9";
    std::uint64_t seed = 1;
    double duration_s = 0.0;
    double bin_width_ps = 10.0;
    std::optional<int> channel;
    bool no_truth = false;
};

std::string fmt(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Scenario scenario_from(const Options& o)
{
    return o.scenario.empty() ? baseline_scenario() : load_scenario(o.scenario);
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DataError("cannot write " + path.string());
    f << text;
}

// Writes `text` to --out if given, otherwise to stdout.
void emit(const Options& o, std::ostream& out, const std::string& text)
{
    if (o.out.empty())
        out << text;
    else
        write_file(o.out, text);
}

int cmd_budget(const Options& o, std::ostream& out)
{
    const Scenario sc = scenario_from(o);
    std::vector<DiffractionModel> models{DiffractionModel::ffdp, DiffractionModel::cross_section};
    if (!o.model.empty())
        models = {parse_diffraction_model(o.model)};
    if (std::find(models.begin(), models.end(), DiffractionModel::cross_section) != models.end() &&
        !(sc.array.cross_section_m2 > 0.0))
    {
        if (!o.model.empty())
            throw ConfigError("satellite.cross_section_m2", "required by the cross-section model");
        models = {DiffractionModel::ffdp};
    }

    const auto& samples = sc.range.samples();
    const double range = samples.size() > 1 ? sc.range.mean_range(samples.front().t_s, samples.back().t_s)
                                            : sc.range.range_at(0.0);
    std::ostringstream s;
    s << provenance_comment(sc.hash, 0) << '\n';
    s << "# scenario=" << sc.name << " slant_range_km=" << fmt(range * 1e-3) << '\n';
    s << "model,receiver,channel,l_diff_db,l_a_db,l_down_db,t_down,l_rx_db,t_rx\n";
    for (const auto m : models)
        for (std::size_t i = 0; i < sc.receivers.size(); ++i)
        {
            const LinkBudget b = sc.budget(i, range, m);
            s << to_string(m) << ',' << sc.receivers[i].name << ',' << sc.receivers[i].channel_id << ','
              << fmt(db_from_transmittance(b.t_diff).value()) << ',' << fmt(sc.atmosphere_loss.value()) << ','
              << fmt(b.l_down.value()) << ',' << fmt(b.t_down.value()) << ',' << fmt(b.l_rx.value()) << ','
              << fmt(b.t_rx.value()) << '\n';
        }
    emit(o, out, s.str());
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out)
{
    if (!(o.duration_s > 0.0))
        throw UsageError("--duration-s must be positive");
    if (o.out.empty())
        throw UsageError("--out is required");
    const Scenario sc = scenario_from(o);
    const TagStream stream = simulate_pass(sc, o.duration_s, o.seed);

    const fs::path path(o.out);
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw DataError("cannot write " + path.string());
        write_tags_csv(f, stream, !o.no_truth);
    }
    write_file(metadata_path(path), metadata_to_json(stream.metadata));

    out << "wrote " << stream.events.size() << " events to " << path.string() << '\n';
    for (std::size_t i = 0; i < kTruthClasses; ++i)
        out << "  " << to_string(static_cast<Truth>(i)) << ": " << stream.metadata.class_counts[i] << '\n';
    return kExitOk;
}

ojson summary_json(const ChannelAnalysis& a, const Scenario& sc, std::size_t rx)
{
    const auto& s = a.summary;
    ojson j;
    j["channel"] = a.channel;
    j["receiver"] = sc.receivers[rx].name;
    j["no_signal"] = s.no_signal;
    j["intervals_total"] = s.intervals_total;
    j["intervals_selected"] = s.intervals_selected;
    j["r_det_hz"] = s.r_det_hz;
    j["r_det_sigma_hz"] = s.r_det_sigma_hz;
    j["snr"] = s.snr;
    j["snr_sigma"] = s.snr_sigma;
    j["mu_sat"] = s.mu_sat;
    j["mu_sat_sigma"] = s.mu_sat_sigma;
    j["residuals"] = a.residuals.items.size();
    return j;
}

std::string intervals_csv(const ChannelAnalysis& a, const std::string& header)
{
    std::ostringstream s;
    s << header << '\n';
    s << "k,tau_s,n_tot_w,n_bkg_w,n_det,r_det_hz,bkg_rate_w_hz,snr,selected\n";
    for (const auto& i : a.intervals)
        s << i.k << ',' << fmt(i.tau_s) << ',' << i.n_tot_w << ',' << fmt(i.n_bkg_w) << ',' << fmt(i.n_det) << ','
          << fmt(i.r_det_hz) << ',' << fmt(i.bkg_rate_w_hz) << ',' << fmt(i.snr) << ',' << (i.selected ? 1 : 0)
          << '\n';
    return s.str();
}

std::string histogram_csv(const Histogram& h, const std::string& header)
{
    std::ostringstream s;
    s << header << '\n';
    s << "bin_start_ps,bin_end_ps,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        s << fmt(h.edge(i), 10) << ',' << fmt(h.edge(i + 1), 10) << ',' << h.counts[i] << '\n';
    return s.str();
}

std::string occupancy_csv(const PeriodOccupancy& p, const std::string& header)
{
    std::ostringstream s;
    s << header << '\n';
    s << "phase_start_ms,closed_hz,signal_region_hz,open_other_hz\n";
    for (std::size_t i = 0; i < p.closed_hz.size(); ++i)
        s << fmt(static_cast<double>(i) * p.bin_width_ms) << ',' << fmt(p.closed_hz[i]) << ','
          << fmt(p.signal_region_hz[i]) << ',' << fmt(p.open_other_hz[i]) << '\n';
    return s.str();
}

int cmd_analyze(const Options& o, std::ostream& out)
{
    if (o.tags.empty())
        throw UsageError("--tags is required");
    if (o.out.empty())
        throw UsageError("--out is required");
    const Scenario sc = scenario_from(o);
    const fs::path tag_path(o.tags);
    const auto tags = read_tags_csv(tag_path);

    StreamMetadata md;
    const fs::path side = metadata_path(tag_path);
    bool have_md = false;
    if (fs::exists(side))
    {
        std::ifstream f(side);
        std::ostringstream ss;
        ss << f.rdbuf();
        md = metadata_from_json(ss.str());
        have_md = true;
    }
    double duration = o.duration_s;
    if (!(duration > 0.0))
    {
        if (have_md)
            duration = md.duration_s;
        else if (!tags.empty())
            duration = std::ceil(static_cast<double>(tags.back().time) * 1e-12 / sc.analysis.interval_s) *
                       sc.analysis.interval_s;
    }
    if (!(duration > 0.0))
        throw DataError("cannot infer the acquisition duration; pass --duration-s");

    std::vector<int> channels;
    if (o.channel)
        channels.push_back(*o.channel);
    else
        for (const auto& rx : sc.receivers)
            channels.push_back(rx.channel_id);

    const std::string header = provenance_comment(sc.hash, md.seed);
    const fs::path dir(o.out);
    fs::create_directories(dir);

    ojson report;
    report["scenario"] = sc.name;
    report["scenario_hash"] = hex64(sc.hash);
    report["seed"] = md.seed;
    report["duration_s"] = duration;
    report["tags"] = tags.size();
    report["channels"] = ojson::array();
    for (const int ch : channels)
    {
        std::size_t rx = 0;
        try
        {
            rx = sc.receiver_index(ch);
        }
        catch (const std::invalid_argument& e)
        {
            throw UsageError(e.what());
        }
        const ChannelAnalysis a = analyze_channel(tags, sc, ch, duration);
        const std::string suffix = "_ch" + std::to_string(ch) + ".csv";
        write_file(dir / ("intervals" + suffix), intervals_csv(a, header));
        write_file(dir / ("histogram" + suffix), histogram_csv(a.histogram, header));
        const auto occ = period_occupancy(tags, sc.schedule, round_trip_ps(sc.mean_range_m(duration)), duration,
                                          1.0, ch);
        write_file(dir / ("occupancy" + suffix), occupancy_csv(occ, header));
        report["channels"].push_back(summary_json(a, sc, rx));

        const auto& s = a.summary;
        out << "channel " << ch << " (" << sc.receivers[rx].name << "): ";
        if (s.no_signal)
            out << "no-signal (" << s.intervals_selected << "/" << s.intervals_total << " intervals selected)\n";
        else
            out << "R_det=" << fmt(s.r_det_hz, 4) << " +- " << fmt(s.r_det_sigma_hz, 2) << " Hz, SNR="
                << fmt(s.snr, 3) << " +- " << fmt(s.snr_sigma, 2) << ", mu_sat=" << fmt(s.mu_sat, 3) << " +- "
                << fmt(s.mu_sat_sigma, 2) << " (" << s.intervals_selected << "/" << s.intervals_total
                << " intervals)\n";
    }
    write_file(dir / "summary.json", report.dump(2) + "\n");
    return kExitOk;
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> v;
    for (const auto& f : csv::split(text))
    {
        try
        {
            v.push_back(csv::to_double(f));
        }
        catch (const DataError&)
        {
            throw UsageError("--incidence-deg: not a number: '" + f + "'");
        }
    }
    return v;
}

int cmd_response(const Options& o, std::ostream& out)
{
    const Scenario sc = scenario_from(o);
    const auto angles = parse_list(o.incidences);
    const GaussianPulse pulse(sc.pulse_fwhm_ps);
    const double az = sc.azimuth();
    const std::string header = provenance_comment(sc.hash, 0);

    std::ostringstream table;
    table << header << '\n' << "incidence_deg,peak_to_peak_ps,offset_spread_ps\n";
    for (const double deg : angles)
    {
        if (!(deg >= 0.0 && deg < 90.0))
            throw UsageError("--incidence-deg values must lie in [0, 90)");
        const double inc = deg * kPi / 180.0;
        const auto profile = array_impulse_response(sc.geometry, inc, az, pulse, o.bin_width_ps);
        const auto offsets = ccr_time_offsets(sc.geometry, inc, az);
        const auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.end());
        const double pp = peak_to_peak(profile);
        table << fmt(deg) << ',' << fmt(pp) << ',' << fmt(*hi - *lo) << '\n';

        if (!o.out.empty())
        {
            std::ostringstream p;
            p << header << "\n# incidence_deg=" << fmt(deg) << " pulse_fwhm_ps=" << fmt(sc.pulse_fwhm_ps) << '\n';
            p << "time_ps,density_per_ps\n";
            for (std::size_t i = 0; i < profile.densities.size(); ++i)
                p << fmt(profile.bin_center(i), 10) << ',' << fmt(profile.densities[i], 8) << '\n';
            write_file(fs::path(o.out) / ("profile_" + fmt(deg) + "deg.csv"), p.str());
        }
    }
    if (!o.out.empty())
        write_file(fs::path(o.out) / "peak_to_peak.csv", table.str());
    out << table.str();
    return kExitOk;
}

int cmd_project(const Options& o, std::ostream& out)
{
    const Scenario sc = scenario_from(o);
    const PlanFile pf = o.plan.empty() ? PlanFile{baseline_from_scenario(sc), UpgradePlan{}} : load_plan(o.plan, sc);
    LinkProjection base, proj;
    try
    {
        base = baseline_projection(pf.baseline);
        proj = project_upgraded_link(pf.baseline, pf.plan);
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError("plan", e.what());
    }
    auto to_json = [](const LinkProjection& p) {
        ojson j;
        j["r_det_hz"] = p.r_det_hz;
        j["dark_hz"] = p.dark_hz;
        j["fluorescence_hz"] = p.fluorescence_hz;
        j["albedo_hz"] = p.albedo_hz;
        j["background_hz"] = p.background_hz;
        j["background_in_window_hz"] = p.background_in_window_hz;
        j["snr"] = p.snr;
        return j;
    };
    ojson j;
    j["scenario"] = sc.name;
    j["scenario_hash"] = hex64(sc.hash);
    j["baseline"] = to_json(base);
    j["projected"] = to_json(proj);
    emit(o, out, j.dump(2) + "\n");
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Single-photon GNSS link simulator and analysis toolkit", "photonlink"};
    app.require_subcommand(1);
    Options o;

    auto add_scenario = [&](CLI::App* c) {
        c->add_option("--scenario", o.scenario, "scenario JSON (default: built-in baseline)");
    };

    auto* budget = app.add_subcommand("budget", "down-link and receiver budget");
    add_scenario(budget);
    budget->add_option("--model", o.model, "diffraction model")->check(CLI::IsMember({"ffdp", "cross-section"}));
    budget->add_option("--out", o.out, "output CSV (default: stdout)");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic tag stream");
    add_scenario(simulate);
    simulate->add_option("--duration-s", o.duration_s, "acquisition length")->required();
    simulate->add_option("--seed", o.seed, "random seed");
    simulate->add_option("--out", o.out, "tag CSV path")->required();
    simulate->add_flag("--no-truth", o.no_truth, "omit the truth column");

    auto* analyze = app.add_subcommand("analyze", "residuals, interval statistics and pass summary");
    add_scenario(analyze);
    analyze->add_option("--tags", o.tags, "tag CSV")->required();
    analyze->add_option("--out", o.out, "output directory")->required();
    analyze->add_option("--channel", o.channel, "analyse one channel only");
    analyze->add_option("--duration-s", o.duration_s, "acquisition length (default: from the sidecar)");

    auto* response = app.add_subcommand("response", "array impulse response and peak-to-peak spread");
    add_scenario(response);
    response->add_option("--incidence-deg", o.incidences, "comma-separated incidence angles");
    response->add_option("--bin-width-ps", o.bin_width_ps, "profile bin width");
    response->add_option("--out", o.out, "output directory for profile CSVs");

    auto* project = app.add_subcommand("project", "upgraded-link projection");
    add_scenario(project);
    project->add_option("--plan", o.plan, "upgrade plan JSON (default: built-in plan)");
    project->add_option("--out", o.out, "output JSON (default: stdout)");

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try
    {
        if (budget->parsed())
            return cmd_budget(o, out);
        if (simulate->parsed())
            return cmd_simulate(o, out);
        if (analyze->parsed())
            return cmd_analyze(o, out);
        if (response->parsed())
            return cmd_response(o, out);
        return cmd_project(o, out);
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const UsageError& e)
    {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const DataError& e)
    {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    catch (const fs::filesystem_error& e)
    {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    catch (const std::logic_error& e)
    {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace photonlink
