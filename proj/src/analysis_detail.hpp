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

#ifndef PHOTONLINK_ANALYSIS_DETAIL_HPP
#define PHOTONLINK_ANALYSIS_DETAIL_HPP

#include <cstddef>
#include <cstdint>

#include "photonlink/analysis.hpp"

namespace photonlink::detail
{

void validate_interval_inputs(const ResidualSet& rs, double duration_s, const AnalysisParams& params);
std::size_t interval_count(double duration_s, double interval_s);
IntervalStats make_interval(std::int64_t k, std::int64_t n_tot, std::int64_t n_out, std::int64_t n_sig,
                            double scale, const AnalysisParams& params);

} // namespace photonlink::detail

#endif
