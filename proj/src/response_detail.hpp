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

#ifndef PHOTONLINK_RESPONSE_DETAIL_HPP
#define PHOTONLINK_RESPONSE_DETAIL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "photonlink/ccr_response.hpp"

namespace photonlink::detail
{

// Shared set-up for the parallel and reference impulse-response kernels.
struct ResponseLayout
{
    std::vector<double> offsets;
    std::vector<double> weights;
    double weight_sum = 0.0;
    double origin = 0.0;
    std::size_t bins = 0;
    double sigma = 1.0;
};

ResponseLayout response_layout(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                               const GaussianPulse& pulse, double bin_width_ps, std::span<const double> weights);

} // namespace photonlink::detail

#endif
