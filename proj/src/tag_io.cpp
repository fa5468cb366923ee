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

#include "photonlink/tag_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "photonlink/scenario.hpp"

namespace photonlink
{

namespace csv
{

std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.emplace_back(field);
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::vector<std::string>> read_table(std::istream& is, const std::vector<std::string>& header,
                                                 std::size_t optional_tail)
{
    std::string line;
    bool have_header = false;
    std::size_t columns = 0;
    std::size_t lineno = 0;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        auto fields = split(line);
        if (!have_header)
        {
            const std::size_t required = header.size() - optional_tail;
            if (fields.size() < required || fields.size() > header.size())
                throw DataError("line " + std::to_string(lineno) + ": unexpected CSV header '" + line + "'");
            for (std::size_t i = 0; i < fields.size(); ++i)
                if (fields[i] != header[i])
                    throw DataError("line " + std::to_string(lineno) + ": expected column '" + header[i] +
                                    "', found '" + fields[i] + "'");
            columns = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != columns)
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                            " fields, found " + std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    if (!have_header)
        throw DataError("CSV has no header line");
    return rows;
}

double to_double(const std::string& s)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw DataError("not a number: '" + s + "'");
        return v;
    }
    catch (const std::logic_error&)
    {
        throw DataError("not a number: '" + s + "'");
    }
}

long long to_int(const std::string& s)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("not an integer: '" + s + "'");
    return v;
}

} // namespace csv

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string provenance_comment(std::uint64_t scenario_hash, std::uint64_t seed)
{
    return "# scenario_hash=" + hex64(scenario_hash) + " seed=" + std::to_string(seed);
}

void write_tags_csv(std::ostream& os, const TagStream& stream, bool with_truth)
{
    os << provenance_comment(stream.metadata.scenario_hash, stream.metadata.seed) << '\n';
    os << (with_truth ? "time_ps,channel,truth\n" : "time_ps,channel\n");
    std::string line;
    for (const auto& e : stream.events)
    {
        line = std::to_string(e.time);
        line += ',';
        line += std::to_string(e.channel);
        if (with_truth)
        {
            line += ',';
            line += to_string(e.truth);
        }
        line += '\n';
        os << line;
    }
}

std::vector<TagEvent> read_tags_csv(std::istream& is)
{
    const auto rows = csv::read_table(is, {"time_ps", "channel", "truth"}, 1);
    std::vector<TagEvent> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const auto& r = rows[i];
        TagEvent e;
        e.time = csv::to_int(r[0]);
        e.channel = static_cast<int>(csv::to_int(r[1]));
        if (r.size() > 2)
        {
            try
            {
                e.truth = parse_truth(r[2]);
            }
            catch (const std::invalid_argument& ex)
            {
                throw DataError("row " + std::to_string(i + 1) + ": " + ex.what());
            }
        }
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(), [](const TagEvent& a, const TagEvent& b) { return a.time < b.time; });
    return out;
}

std::vector<TagEvent> read_tags_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open tag file " + path.string());
    try
    {
        return read_tags_csv(in);
    }
    catch (const DataError& e)
    {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string metadata_to_json(const StreamMetadata& md)
{
    nlohmann::ordered_json j;
    j["scenario_hash"] = hex64(md.scenario_hash);
    j["seed"] = md.seed;
    j["duration_s"] = md.duration_s;
    nlohmann::ordered_json classes;
    for (std::size_t i = 0; i < kTruthClasses; ++i)
        classes[std::string(to_string(static_cast<Truth>(i)))] = md.class_counts[i];
    j["class_counts"] = classes;
    nlohmann::ordered_json channels;
    for (const auto& [ch, n] : md.channel_counts)
        channels[std::to_string(ch)] = n;
    j["channel_counts"] = channels;
    return j.dump(2) + "\n";
}

StreamMetadata metadata_from_json(const std::string& text)
{
    StreamMetadata md;
    try
    {
        const auto j = nlohmann::json::parse(text);
        md.scenario_hash = std::stoull(j.at("scenario_hash").get<std::string>(), nullptr, 16);
        md.seed = j.at("seed").get<std::uint64_t>();
        md.duration_s = j.at("duration_s").get<double>();
        if (j.contains("class_counts"))
            for (std::size_t i = 0; i < kTruthClasses; ++i)
                md.class_counts[i] = j["class_counts"].value(std::string(to_string(static_cast<Truth>(i))), 0);
        if (j.contains("channel_counts"))
            for (const auto& [k, v] : j["channel_counts"].items())
                md.channel_counts[std::stoi(k)] = v.get<std::int64_t>();
    }
    catch (const std::exception& e)
    {
        throw DataError(std::string("bad metadata sidecar: ") + e.what());
    }
    return md;
}

std::filesystem::path metadata_path(const std::filesystem::path& tags_csv)
{
    auto p = tags_csv;
    p.replace_extension(".json");
    return p;
}

} // namespace photonlink
