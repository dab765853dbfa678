#pragma once

#include <stdexcept>
#include <string>

namespace oner {

// Quantities at the interface carry a unit; they are converted to internal
// units: G, us, rad, rad/us (angular), m, W/m^2, W, and plain ratios.
enum class Dimension { field, time, angle, frequency, length, intensity, power, ratio };

std::string to_string(Dimension d);

class UnitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// "3000 gauss", "0.5us", "60 deg", "30 MHz", "2.5 %". Frequencies are cyclic at
// the interface (MHz) and returned as angular rad/us. Throws UnitError.
double parse_quantity(const std::string& text, Dimension expected);

// Canonical interface units: G, us, deg, MHz, um, W/cm2, mW, %.
const char* canonical_unit(Dimension d);
double parse_canonical(const std::string& text, Dimension expected);
double canonical_to_internal(double value, Dimension d);
double internal_to_canonical(double value, Dimension d);
// Canonical value with enough digits that parse_canonical returns it exactly.
std::string format_canonical(double value, Dimension d);
std::string format_quantity(double internal, Dimension d);

}  // namespace oner
