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

#ifndef PHOTONLINK_LINK_BUDGET_HPP
#define PHOTONLINK_LINK_BUDGET_HPP

#include <string>
#include <string_view>

#include "photonlink/units.hpp"

namespace photonlink
{

/// A single corner-cube retroreflector.
struct CcrSpec
{
    double diameter_m = 0.026;
    double reflectivity = 0.93;
    bool coated = false;

    double area_m2() const;
    void validate() const;
};

enum class ArrayShape
{
    ring,
    rectangle,
    disk
};

std::string_view to_string(ArrayShape shape);
ArrayShape parse_array_shape(std::string_view name);

/// Retroreflector array as seen by the link budget: optical constants plus
/// the outline used to lay out CCR positions.
struct CcrArraySpec
{
    CcrSpec ccr;
    int count = 1;
    double effective_area_m2 = 0.0;
    // Cross-section as it enters the top-hat model: t = Sigma / (4 pi rho A_RRA) * A_tel / R^2.
    double cross_section_m2 = 0.0;
    ArrayShape shape = ArrayShape::ring;
    double outer_diameter_m = 0.0;
    double inner_diameter_m = 0.0;
    double width_m = 0.0;
    double height_m = 0.0;

    void validate() const;
};

class Telescope
{
  public:
    explicit Telescope(double diameter_m);

    double diameter_m() const { return diameter_m_; }
    double area_m2() const { return area_m2_; }

  private:
    double diameter_m_;
    double area_m2_;
};

struct ReceiverSpec
{
    std::string name = "SPAD";
    int channel_id = 0;
    LossDb optics_loss{8.8};
    double detector_efficiency = 0.5;
    double dark_rate_hz = 400.0;
    double jitter_fwhm_ps = 40.0;
    double filter_band_nm = 3.0;

    void validate() const;
};

enum class DiffractionModel
{
    ffdp,
    cross_section
};

std::string_view to_string(DiffractionModel model);

/// Accepts "ffdp", "cross-section" and "cross_section"; anything else is a usage error.
DiffractionModel parse_diffraction_model(std::string_view name);

struct LinkBudget
{
    DiffractionModel model = DiffractionModel::ffdp;
    Transmittance t_diff{1.0};
    Transmittance t_a{1.0};
    Transmittance t_down{1.0};
    Transmittance t_rx{1.0};
    LossDb l_down{0.0};
    LossDb l_rx{0.0};
};

struct DownlinkGeometry
{
    double wavelength_m = 532e-9;
    Telescope telescope{1.5};
    double slant_range_m = 19'500e3;
    CcrArraySpec array;
};

// TIR corner cube far-field model: central peak reduced to 26.4% of an
// equivalent circular aperture, receiver on a lateral lobe at ~30% of that.
inline constexpr double kTirCentralPeakFraction = 0.264;
inline constexpr double kTirLateralLobeFraction = 0.3;

/// Far-field lobe transmittance 0.264 * 0.3 * A_ccr A_tel / (lambda^2 R^2),
/// clamped to 1. `illuminated_ccrs` multiplies the single-CCR value and
/// defaults to one.
Transmittance diffraction_ffdp(const CcrSpec& ccr, const Telescope& tel, double wavelength_m, double range_m,
                               int illuminated_ccrs = 1);

/// Top-hat pattern of solid angle 4 pi rho A_RRA / Sigma.
Transmittance diffraction_cross_section(const CcrArraySpec& array, const Telescope& tel, double range_m);
double top_hat_solid_angle(const CcrArraySpec& array);

/// Sigma for which the top-hat model returns `target` at `range_m`.
double matching_cross_section(Transmittance target, const CcrArraySpec& array, const Telescope& tel,
                              double range_m);

LinkBudget downlink_budget(const DownlinkGeometry& geometry, DiffractionModel model, LossDb atmosphere,
                           Transmittance t_rx = Transmittance(1.0));

Transmittance receiver_transmittance(const ReceiverSpec& rx);

/// Mean photon number per pulse at the satellite from a measured detection rate.
double estimate_mu_sat(double r_det_hz, double rep_rate_hz, Transmittance t_down, Transmittance t_rx);

/// Per-pulse detection probability 1 - exp(-mu t_down t_rx), linearised below 1e-3.
double detection_probability(double mu, Transmittance t_down, Transmittance t_rx);

/// Forward signal rate mu * nu * t_down * t_rx.
double forward_detection_rate(double mu, double rep_rate_hz, Transmittance t_down, Transmittance t_rx);

/// Measured operating point of the existing link, used as the starting point
/// of an upgrade projection. Rates are referred to open-shutter time.
struct ProjectionBaseline
{
    double r_det_hz = 58.0;
    double mu_sat = 15.0;
    double dark_hz = 700.0;
    double fluorescence_hz = 195.0;
    double albedo_hz = 1900.0;
    double window_ps = 400.0;
    double rep_rate_hz = 100e6;
    double filter_band_nm = 3.0;
};

struct UpgradePlan
{
    double source_mu = 1.0;
    double tx_divergence_semi_angle_rad = 10e-6;
    LossDb diffraction_gain{20.0};
    double bs_removal_signal_factor = 4.0;
    double filter_band_nm = 0.3;
    double albedo_scale = 1.0;
    bool fluorescence_removed = true;
    double dark_rate_hz = 400.0;
    double window_ps = 40.0;
    double rep_rate_hz = 1e9;

    /// Plan that reproduces `baseline` unchanged.
    static UpgradePlan identity(const ProjectionBaseline& baseline);
};

struct LinkProjection
{
    double r_det_hz = 0.0;
    double dark_hz = 0.0;
    double fluorescence_hz = 0.0;
    double albedo_hz = 0.0;
    double background_hz = 0.0;
    double background_in_window_hz = 0.0;
    double snr = 0.0;
};

/// Signal-to-background ratio of in-window counts for a train of period 1/nu.
double in_window_snr(double r_det_hz, double background_hz, double window_ps, double rep_rate_hz);

LinkProjection baseline_projection(const ProjectionBaseline& baseline);
LinkProjection project_upgraded_link(const ProjectionBaseline& baseline, const UpgradePlan& plan);

} // namespace photonlink

#endif
