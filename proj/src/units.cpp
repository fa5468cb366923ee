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

#include "photonlink/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace photonlink
{

Transmittance::Transmittance(double value) : value_(value)
{
    if (!(value > 0.0 && value <= 1.0))
        throw std::domain_error("transmittance must lie in (0, 1], got " + std::to_string(value));
}

LossDb::LossDb(double value) : value_(value)
{
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::domain_error("loss in dB must be finite and >= 0, got " + std::to_string(value));
}

LossDb db_from_transmittance(Transmittance t)
{
    return LossDb(-10.0 * std::log10(t.value()));
}

Transmittance transmittance_from_db(LossDb l)
{
    return Transmittance(std::pow(10.0, -l.value() / 10.0));
}

double fwhm_to_sigma(double fwhm_ps)
{
    if (!(fwhm_ps > 0.0))
        throw std::domain_error("FWHM must be positive");
    return fwhm_ps / kFwhmPerSigma;
}

GaussianPulse::GaussianPulse(double fwhm, double center) : fwhm_ps(fwhm), center_ps(center)
{
    if (!(fwhm > 0.0))
        throw std::domain_error("pulse FWHM must be positive");
}

double GaussianPulse::density(double t_ps) const
{
    const double s = sigma_ps();
    const double z = (t_ps - center_ps) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * kPi));
}

double GaussianPulse::cdf(double t_ps) const
{
    const double z = (t_ps - center_ps) / (sigma_ps() * std::sqrt(2.0));
    return 0.5 * std::erfc(-z);
}

} // namespace photonlink
