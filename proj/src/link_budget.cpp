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

#include "photonlink/link_budget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photonlink
{

namespace
{
double circle_area(double diameter) { return kPi * 0.25 * diameter * diameter; }
} // namespace

double CcrSpec::area_m2() const { return circle_area(diameter_m); }

void CcrSpec::validate() const
{
    if (!(diameter_m > 0.0 && diameter_m < 0.2))
        throw std::domain_error("CCR diameter must lie in (0, 0.2) m");
    if (!(reflectivity > 0.0 && reflectivity <= 1.0))
        throw std::domain_error("CCR reflectivity must lie in (0, 1]");
}

std::string_view to_string(ArrayShape shape)
{
    switch (shape)
    {
    case ArrayShape::ring:
        return "ring";
    case ArrayShape::rectangle:
        return "rectangle";
    case ArrayShape::disk:
        return "disk";
    }
    return "?";
}

ArrayShape parse_array_shape(std::string_view name)
{
    if (name == "ring")
        return ArrayShape::ring;
    if (name == "rectangle")
        return ArrayShape::rectangle;
    if (name == "disk")
        return ArrayShape::disk;
    throw std::invalid_argument("unknown array shape '" + std::string(name) + "'");
}

void CcrArraySpec::validate() const
{
    ccr.validate();
    if (count <= 0)
        throw std::domain_error("CCR count must be positive");
    if (effective_area_m2 < 0.0 || effective_area_m2 > count * ccr.area_m2() * (1.0 + 1e-12))
        throw std::domain_error("array effective area must lie in [0, count * A_ccr]");
    if (cross_section_m2 < 0.0)
        throw std::domain_error("array cross-section must be non-negative");
    switch (shape)
    {
    case ArrayShape::ring:
    case ArrayShape::disk:
        if (!(outer_diameter_m > 0.0) || inner_diameter_m < 0.0 || inner_diameter_m > outer_diameter_m)
            throw std::domain_error("array outer/inner diameter invalid");
        break;
    case ArrayShape::rectangle:
        if (!(width_m > 0.0 && height_m > 0.0))
            throw std::domain_error("rectangular array needs positive width and height");
        break;
    }
}

Telescope::Telescope(double diameter_m) : diameter_m_(diameter_m), area_m2_(circle_area(diameter_m))
{
    if (!(diameter_m > 0.0))
        throw std::domain_error("telescope diameter must be positive");
}

void ReceiverSpec::validate() const
{
    if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
        throw std::domain_error("detector efficiency must lie in (0, 1]");
    if (dark_rate_hz < 0.0)
        throw std::domain_error("dark rate must be non-negative");
    if (!(jitter_fwhm_ps > 0.0))
        throw std::domain_error("jitter FWHM must be positive");
    if (!(filter_band_nm > 0.0))
        throw std::domain_error("filter band must be positive");
}

std::string_view to_string(DiffractionModel model)
{
    return model == DiffractionModel::ffdp ? "ffdp" : "cross-section";
}

DiffractionModel parse_diffraction_model(std::string_view name)
{
    if (name == "ffdp")
        return DiffractionModel::ffdp;
    if (name == "cross-section" || name == "cross_section")
        return DiffractionModel::cross_section;
    throw std::invalid_argument("unknown diffraction model '" + std::string(name) + "'");
}

Transmittance diffraction_ffdp(const CcrSpec& ccr, const Telescope& tel, double wavelength_m, double range_m,
                               int illuminated_ccrs)
{
    if (!(range_m > 0.0))
        throw std::domain_error("slant range must be positive");
    if (!(wavelength_m > 0.0))
        throw std::domain_error("wavelength must be positive");
    if (illuminated_ccrs <= 0)
        throw std::domain_error("illuminated CCR count must be positive");
    ccr.validate();
    const double t = kTirCentralPeakFraction * kTirLateralLobeFraction * ccr.area_m2() * tel.area_m2() /
                     (wavelength_m * wavelength_m * range_m * range_m) * illuminated_ccrs;
    // far-field formula diverges in the near field
    return Transmittance(std::min(t, 1.0));
}

double top_hat_solid_angle(const CcrArraySpec& array)
{
    if (!(array.cross_section_m2 > 0.0))
        throw std::domain_error("array cross-section must be positive");
    if (!(array.effective_area_m2 > 0.0) || !(array.ccr.reflectivity > 0.0))
        throw std::domain_error("array effective area and reflectivity must be positive");
    return 4.0 * kPi * array.ccr.reflectivity * array.effective_area_m2 / array.cross_section_m2;
}

Transmittance diffraction_cross_section(const CcrArraySpec& array, const Telescope& tel, double range_m)
{
    if (!(range_m > 0.0))
        throw std::domain_error("slant range must be positive");
    const double omega = top_hat_solid_angle(array);
    return Transmittance(std::min(tel.area_m2() / (omega * range_m * range_m), 1.0));
}

double matching_cross_section(Transmittance target, const CcrArraySpec& array, const Telescope& tel,
                              double range_m)
{
    if (!(range_m > 0.0) || !(array.effective_area_m2 > 0.0))
        throw std::domain_error("range and effective area must be positive");
    return target.value() * 4.0 * kPi * array.ccr.reflectivity * array.effective_area_m2 * range_m * range_m /
           tel.area_m2();
}

LinkBudget downlink_budget(const DownlinkGeometry& geometry, DiffractionModel model, LossDb atmosphere,
                           Transmittance t_rx)
{
    const Transmittance t_diff =
        model == DiffractionModel::ffdp
            ? diffraction_ffdp(geometry.array.ccr, geometry.telescope, geometry.wavelength_m, geometry.slant_range_m)
            : diffraction_cross_section(geometry.array, geometry.telescope, geometry.slant_range_m);
    LinkBudget b;
    b.model = model;
    b.t_diff = t_diff;
    b.t_a = transmittance_from_db(atmosphere);
    b.t_down = b.t_diff * b.t_a;
    b.l_down = db_from_transmittance(b.t_down);
    b.t_rx = t_rx;
    b.l_rx = db_from_transmittance(t_rx);
    return b;
}

Transmittance receiver_transmittance(const ReceiverSpec& rx)
{
    rx.validate();
    return transmittance_from_db(rx.optics_loss) * Transmittance(rx.detector_efficiency);
}

double estimate_mu_sat(double r_det_hz, double rep_rate_hz, Transmittance t_down, Transmittance t_rx)
{
    if (!(rep_rate_hz > 0.0))
        throw std::domain_error("repetition rate must be positive");
    return r_det_hz / (rep_rate_hz * t_down.value() * t_rx.value());
}

double detection_probability(double mu, Transmittance t_down, Transmittance t_rx)
{
    if (mu < 0.0)
        throw std::domain_error("mean photon number must be non-negative");
    const double x = mu * t_down.value() * t_rx.value();
    return x < 1e-3 ? x : -std::expm1(-x);
}

double forward_detection_rate(double mu, double rep_rate_hz, Transmittance t_down, Transmittance t_rx)
{
    return mu * rep_rate_hz * t_down.value() * t_rx.value();
}

UpgradePlan UpgradePlan::identity(const ProjectionBaseline& baseline)
{
    UpgradePlan p;
    p.source_mu = baseline.mu_sat;
    p.diffraction_gain = LossDb(0.0);
    p.bs_removal_signal_factor = 1.0;
    p.filter_band_nm = baseline.filter_band_nm;
    p.albedo_scale = 1.0;
    p.fluorescence_removed = false;
    p.dark_rate_hz = baseline.dark_hz;
    p.window_ps = baseline.window_ps;
    p.rep_rate_hz = baseline.rep_rate_hz;
    return p;
}

double in_window_snr(double r_det_hz, double background_hz, double window_ps, double rep_rate_hz)
{
    const double period_ps = 1e12 / rep_rate_hz;
    if (window_ps > period_ps)
        throw std::invalid_argument("signal window is longer than the pulse period");
    return r_det_hz / (background_hz * window_ps / period_ps);
}

LinkProjection baseline_projection(const ProjectionBaseline& baseline)
{
    LinkProjection out;
    out.r_det_hz = baseline.r_det_hz;
    out.dark_hz = baseline.dark_hz;
    out.fluorescence_hz = baseline.fluorescence_hz;
    out.albedo_hz = baseline.albedo_hz;
    out.background_hz = out.dark_hz + out.fluorescence_hz + out.albedo_hz;
    out.background_in_window_hz = out.background_hz * baseline.window_ps * baseline.rep_rate_hz * 1e-12;
    out.snr = in_window_snr(out.r_det_hz, out.background_hz, baseline.window_ps, baseline.rep_rate_hz);
    return out;
}

LinkProjection project_upgraded_link(const ProjectionBaseline& baseline, const UpgradePlan& plan)
{
    if (!(baseline.mu_sat > 0.0 && baseline.rep_rate_hz > 0.0 && baseline.filter_band_nm > 0.0))
        throw std::invalid_argument("baseline mu, repetition rate and filter band must be positive");
    if (!(plan.source_mu > 0.0 && plan.bs_removal_signal_factor > 0.0 && plan.filter_band_nm > 0.0 &&
          plan.albedo_scale > 0.0 && plan.window_ps > 0.0 && plan.rep_rate_hz > 0.0 &&
          plan.tx_divergence_semi_angle_rad > 0.0) ||
        plan.dark_rate_hz < 0.0)
        throw std::invalid_argument("upgrade plan factors must be positive");
    if (plan.window_ps > 1e12 / plan.rep_rate_hz)
        throw std::invalid_argument("upgrade plan window is longer than the projected pulse period");

    LinkProjection out;
    out.r_det_hz = baseline.r_det_hz * (plan.source_mu / baseline.mu_sat) *
                   std::pow(10.0, plan.diffraction_gain.value() / 10.0) * plan.bs_removal_signal_factor *
                   (plan.rep_rate_hz / baseline.rep_rate_hz);

    // Removing the beam splitters lets more albedo through as well; dark counts are intrinsic.
    out.dark_hz = plan.dark_rate_hz;
    out.fluorescence_hz = plan.fluorescence_removed ? 0.0 : baseline.fluorescence_hz;
    out.albedo_hz = baseline.albedo_hz * (plan.filter_band_nm / baseline.filter_band_nm) *
                    plan.bs_removal_signal_factor * plan.albedo_scale;
    out.background_hz = out.dark_hz + out.fluorescence_hz + out.albedo_hz;
    out.background_in_window_hz = out.background_hz * plan.window_ps * plan.rep_rate_hz * 1e-12;
    out.snr = in_window_snr(out.r_det_hz, out.background_hz, plan.window_ps, plan.rep_rate_hz);
    return out;
}

} // namespace photonlink
