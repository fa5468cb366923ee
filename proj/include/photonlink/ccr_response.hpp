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

#ifndef PHOTONLINK_CCR_RESPONSE_HPP
#define PHOTONLINK_CCR_RESPONSE_HPP

#include <span>
#include <vector>

#include "photonlink/link_budget.hpp"
#include "photonlink/units.hpp"

namespace photonlink
{

struct Point2
{
    double x_m = 0.0;
    double y_m = 0.0;
};

/// CCR centre positions in the array plane. The outline fields bound the positions.
struct ArrayGeometry
{
    ArrayShape shape = ArrayShape::ring;
    std::vector<Point2> positions;
    double outer_diameter_m = 0.0; // ring, disk
    double width_m = 0.0;          // rectangle
    double height_m = 0.0;         // rectangle

    void validate() const;
};

/// Default Glonass-K1 style array: CCR centres on a circle of 0.42 m.
inline constexpr double kDefaultRingDiameter_m = 0.42;
inline constexpr int kDefaultRingCount = 36;

ArrayGeometry ring_geometry(double diameter_m, int count);
ArrayGeometry rectangle_geometry(double width_m, double height_m, int columns, int rows);
/// Concentric rings filling the annulus between the two diameters at roughly `pitch_m` spacing.
ArrayGeometry disk_geometry(double outer_diameter_m, double inner_diameter_m, double pitch_m);

/// Lays out positions for an array spec: ring on the outer diameter, disk as a
/// filled annulus at one-CCR pitch, rectangle as a near-square grid of `count`.
ArrayGeometry geometry_from_spec(const CcrArraySpec& spec);

/// Angular offset of the lateral TIR lobes, 1.4 lambda / D.
double lobe_displacement(double wavelength_m, double ccr_diameter_m);

struct AberrationCheck
{
    bool on_lobe = false;
    double gap_rad = 0.0;
};

AberrationCheck velocity_aberration_check(double lobe_rad, double aberration_rad, double tolerance_rad);

/// Two-way delays 2 (p . u) sin(incidence) / c in ps, u being the in-plane unit
/// vector at `azimuth_rad`. Not re-centred.
std::vector<double> ccr_path_delays(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad);

/// Same as ccr_path_delays but shifted to zero mean.
std::vector<double> ccr_time_offsets(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad);

/// In-plane direction (in [0, pi)) that maximises the spread of projected positions.
double max_spread_azimuth(const ArrayGeometry& geom);

/// Binned density over time; bin i covers [origin + i w, origin + (i+1) w).
struct TemporalProfile
{
    double bin_width_ps = 1.0;
    double origin_ps = 0.0;
    std::vector<double> densities;

    double bin_center(std::size_t i) const { return origin_ps + (static_cast<double>(i) + 0.5) * bin_width_ps; }
    double area() const;
};

/// Equal-weight (or `weights`-weighted) sum of Gaussian pulses centred on the
/// per-CCR offsets, normalised to unit area. Bins are integrated exactly.
TemporalProfile array_impulse_response(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                                       const GaussianPulse& pulse, double bin_width_ps,
                                       std::span<const double> weights = {});

/// Distance between the two highest local maxima at least `min_separation_ps`
/// apart, after a centred boxcar of `smoothing_bins`. Maxima under 10% of the
/// highest are ignored; returns zero if no second peak qualifies.
double peak_to_peak(const TemporalProfile& profile, double min_separation_ps = 150.0, int smoothing_bins = 3);

namespace serial
{
TemporalProfile array_impulse_response(const ArrayGeometry& geom, double incidence_rad, double azimuth_rad,
                                       const GaussianPulse& pulse, double bin_width_ps,
                                       std::span<const double> weights = {});
}

} // namespace photonlink

#endif
