#include "oner/photometry.hpp"

#include <cmath>
#include <stdexcept>

namespace oner {

namespace {
constexpr double kPerMicrosecond = 1e6;

void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}
}  // namespace

double PhotometrySpec::dipole_si() const { return dipole > 0.0 ? dipole : 0.151 / std::sqrt(3.0) * kAtomicUnitDipole; }

void PhotometrySpec::validate() const {
    if (!(dipole >= 0.0) || !(epsilon0 > 0.0) || !(c > 0.0) || !(hbar > 0.0))
        throw std::invalid_argument("photometry constants must be positive");
    if (!(waist > 0.0)) throw std::invalid_argument("beam waist must be > 0");
    if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
}

double rabi_to_intensity(double Omega, const PhotometrySpec& spec) {
    spec.validate();
    require_nonnegative(Omega, "Rabi frequency");
    const double E0 = spec.hbar * Omega * kPerMicrosecond / spec.dipole_si();
    return 0.5 * spec.epsilon0 * spec.c * E0 * E0;
}

double intensity_to_rabi(double intensity, const PhotometrySpec& spec) {
    spec.validate();
    require_nonnegative(intensity, "intensity");
    const double E0 = std::sqrt(2.0 * intensity / (spec.epsilon0 * spec.c));
    return spec.dipole_si() * E0 / spec.hbar / kPerMicrosecond;
}

double beam_power(double peak, double waist) {
    require_nonnegative(peak, "intensity");
    if (!(waist > 0.0)) throw std::invalid_argument("beam waist must be > 0");
    return peak * M_PI * waist * waist / 2.0;
}

double peak_intensity(double power, double waist) {
    require_nonnegative(power, "power");
    if (!(waist > 0.0)) throw std::invalid_argument("beam waist must be > 0");
    return 2.0 * power / (M_PI * waist * waist);
}

double intensity_noise_to_rabi_noise(double rel) {
    require_nonnegative(rel, "relative intensity noise");
    return 0.5 * rel;
}

}  // namespace oner
