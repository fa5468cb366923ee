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

#ifndef PHOTONLINK_UNITS_HPP
#define PHOTONLINK_UNITS_HPP

#include <cstdint>

namespace photonlink
{

// Timeline unit. The tagger resolves 1 ps, and a 300 s acquisition is 3e14 ps.
using Picoseconds = std::int64_t;

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFwhmPerSigma = 2.3548200450309493; // 2 sqrt(2 ln 2)

inline constexpr Picoseconds kPsPerNs = 1'000;
inline constexpr Picoseconds kPsPerMs = 1'000'000'000;
inline constexpr Picoseconds kPsPerS = 1'000'000'000'000;

/// Power transmittance of a link element, 0 < t <= 1.
class Transmittance
{
  public:
    explicit Transmittance(double value);

    double value() const { return value_; }

    friend Transmittance operator*(Transmittance a, Transmittance b) { return Transmittance(a.value_ * b.value_); }

  private:
    double value_;
};

/// Loss in decibels, l = -10 log10(t), l >= 0.
class LossDb
{
  public:
    explicit LossDb(double value);

    double value() const { return value_; }

    friend LossDb operator+(LossDb a, LossDb b) { return LossDb(a.value_ + b.value_); }

  private:
    double value_;
};

LossDb db_from_transmittance(Transmittance t);
Transmittance transmittance_from_db(LossDb l);

double fwhm_to_sigma(double fwhm_ps);

/// Gaussian temporal pulse, parameterised by its FWHM.
struct GaussianPulse
{
    double fwhm_ps = 100.0;
    double center_ps = 0.0;

    GaussianPulse() = default;
    GaussianPulse(double fwhm, double center = 0.0);

    double sigma_ps() const { return fwhm_to_sigma(fwhm_ps); }
    double density(double t_ps) const;
    double cdf(double t_ps) const;
};

} // namespace photonlink

#endif
