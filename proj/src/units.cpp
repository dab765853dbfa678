#include "oner/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "oner/atom.hpp"

namespace oner {

namespace {

struct UnitDef {
    Dimension dim;
    double scale;  // internal = value * scale
};

const std::map<std::string, UnitDef>& unit_table() {
    static const std::map<std::string, UnitDef> t = {
        {"G", {Dimension::field, 1.0}},
        {"gauss", {Dimension::field, 1.0}},
        {"mG", {Dimension::field, 1e-3}},
        {"kG", {Dimension::field, 1e3}},
        {"T", {Dimension::field, 1e4}},
        {"mT", {Dimension::field, 10.0}},
        {"s", {Dimension::time, 1e6}},
        {"ms", {Dimension::time, 1e3}},
        {"us", {Dimension::time, 1.0}},
        {"\xC2\xB5s", {Dimension::time, 1.0}},
        {"\xCE\xBCs", {Dimension::time, 1.0}},
        {"ns", {Dimension::time, 1e-3}},
        {"ps", {Dimension::time, 1e-6}},
        {"rad", {Dimension::angle, 1.0}},
        {"mrad", {Dimension::angle, 1e-3}},
        {"deg", {Dimension::angle, M_PI / 180.0}},
        {"Hz", {Dimension::frequency, kTwoPi * 1e-6}},
        {"kHz", {Dimension::frequency, kTwoPi * 1e-3}},
        {"MHz", {Dimension::frequency, kTwoPi}},
        {"GHz", {Dimension::frequency, kTwoPi * 1e3}},
        {"rad/us", {Dimension::frequency, 1.0}},
        {"rad/s", {Dimension::frequency, 1e-6}},
        {"m", {Dimension::length, 1.0}},
        {"mm", {Dimension::length, 1e-3}},
        {"um", {Dimension::length, 1e-6}},
        {"\xC2\xB5m", {Dimension::length, 1e-6}},
        {"\xCE\xBCm", {Dimension::length, 1e-6}},
        {"nm", {Dimension::length, 1e-9}},
        {"W/m2", {Dimension::intensity, 1.0}},
        {"W/cm2", {Dimension::intensity, 1e4}},
        {"mW/cm2", {Dimension::intensity, 10.0}},
        {"W", {Dimension::power, 1.0}},
        {"mW", {Dimension::power, 1e-3}},
        {"uW", {Dimension::power, 1e-6}},
        {"\xC2\xB5W", {Dimension::power, 1e-6}},
        {"\xCE\xBCW", {Dimension::power, 1e-6}},
        {"%", {Dimension::ratio, 1e-2}},
        {"ppm", {Dimension::ratio, 1e-6}},
    };
    return t;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

std::string to_string(Dimension d) {
    switch (d) {
        case Dimension::field: return "magnetic field";
        case Dimension::time: return "time";
        case Dimension::angle: return "angle";
        case Dimension::frequency: return "frequency";
        case Dimension::length: return "length";
        case Dimension::intensity: return "intensity";
        case Dimension::power: return "power";
        case Dimension::ratio: return "ratio";
    }
    return "?";
}

const char* canonical_unit(Dimension d) {
    switch (d) {
        case Dimension::field: return "G";
        case Dimension::time: return "us";
        case Dimension::angle: return "deg";
        case Dimension::frequency: return "MHz";
        case Dimension::length: return "um";
        case Dimension::intensity: return "W/cm2";
        case Dimension::power: return "mW";
        case Dimension::ratio: return "%";
    }
    return "";
}

double parse_canonical(const std::string& text, Dimension expected) {
    const std::string s = trim(text);
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw UnitError("expected a number with a unit, got '" + text + "'");
    if (!std::isfinite(value)) throw UnitError("non-finite value '" + text + "'");
    const std::string unit = trim(std::string(ptr, end));
    if (unit.empty())
        throw UnitError("missing unit in '" + text + "' (expected a " + to_string(expected) + " such as '1 " +
                        canonical_unit(expected) + "')");
    const auto it = unit_table().find(unit);
    if (it == unit_table().end()) throw UnitError("unknown unit '" + unit + "' in '" + text + "'");
    if (it->second.dim != expected)
        throw UnitError("unit '" + unit + "' is a " + to_string(it->second.dim) + ", expected a " + to_string(expected));
    const double canon = unit_table().at(canonical_unit(expected)).scale;
    return it->second.scale == canon ? value : value * (it->second.scale / canon);
}

double canonical_to_internal(double value, Dimension d) { return value * unit_table().at(canonical_unit(d)).scale; }
double internal_to_canonical(double value, Dimension d) { return value / unit_table().at(canonical_unit(d)).scale; }

double parse_quantity(const std::string& text, Dimension expected) {
    return canonical_to_internal(parse_canonical(text, expected), expected);
}

std::string format_canonical(double value, Dimension d) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);  // shortest exact representation
    return std::string(buf, res.ptr) + " " + canonical_unit(d);
}

std::string format_quantity(double internal, Dimension d) { return format_canonical(internal_to_canonical(internal, d), d); }

}  // namespace oner
