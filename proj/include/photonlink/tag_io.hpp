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

#ifndef PHOTONLINK_TAG_IO_HPP
#define PHOTONLINK_TAG_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "photonlink/channel_sim.hpp"

namespace photonlink
{

/// Tag CSV: optional '#' comment lines, then a `time_ps,channel[,truth]`
/// header and one event per line.
void write_tags_csv(std::ostream& os, const TagStream& stream, bool with_truth = true);
std::vector<TagEvent> read_tags_csv(std::istream& is);
std::vector<TagEvent> read_tags_csv(const std::filesystem::path& path);

std::string metadata_to_json(const StreamMetadata& md);
StreamMetadata metadata_from_json(const std::string& text);

/// Sidecar path for a tag file: same stem, `.json` extension.
std::filesystem::path metadata_path(const std::filesystem::path& tags_csv);

/// `# scenario_hash=<hex> seed=<n>` line that heads every output table.
std::string provenance_comment(std::uint64_t scenario_hash, std::uint64_t seed);
std::string hex64(std::uint64_t v);

namespace csv
{
std::vector<std::string> split(std::string_view line);
/// Data rows of a CSV with the given leading header columns; comment lines
/// are skipped. Throws DataError on a header mismatch.
std::vector<std::vector<std::string>> read_table(std::istream& is, const std::vector<std::string>& header,
                                                 std::size_t optional_tail = 0);
double to_double(const std::string& s);
long long to_int(const std::string& s);
} // namespace csv

} // namespace photonlink

#endif
