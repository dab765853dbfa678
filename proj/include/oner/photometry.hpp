#pragma once

#include <array>

namespace oner {

// CODATA 2018 values, SI.
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kEpsilon0 = 8.8541878128e-12;     // F/m
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kAtomicUnitDipole = 8.4783536255e-30;  // e a0 in C m

// Rabi frequencies here are angular, in the library's rad/us; intensities are
// W/m^2, powers W, lengths m.
struct PhotometrySpec {
    double dipole = 0.0;  // C m; 0 selects 0.151/sqrt(3) e a0
    double epsilon0 = kEpsilon0;
    double c = kSpeedOfLight;
    double hbar = kHbar;
    double waist = 50e-6;
    double wavelength = 689e-9;

    double dipole_si() const;
    void validate() const;
};

// I = eps0 c (hbar Omega / D)^2 / 2
double rabi_to_intensity(double Omega, const PhotometrySpec& spec = {});
double intensity_to_rabi(double intensity, const PhotometrySpec& spec = {});

// Gaussian beam: peak intensity I = 2 P / (pi w0^2).
double beam_power(double peak_intensity, double waist);
double peak_intensity(double power, double waist);

// Omega ~ sqrt(I), so dOmega/Omega = dI/I / 2.
double intensity_noise_to_rabi_noise(double relative_intensity_noise);

// Intensities quoted alongside the formula in the literature for three Rabi
// frequencies. They sit a factor of about (2 pi)^2 below the formula output and
// are kept as labelled data only.
struct IntensityReference {
    double rabi_MHz;        // Omega / 2pi
    double intensity_W_cm2;
};
inline constexpr std::array<IntensityReference, 3> kPublishedIntensities{{{20.0, 1.0}, {40.0, 4.0}, {60.0, 10.0}}};

}  // namespace oner
