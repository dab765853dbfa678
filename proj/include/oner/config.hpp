#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oner/photometry.hpp"
#include "oner/stability.hpp"

namespace oner {

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::invalid_argument(path.empty() ? what : path + ": " + what), key(path) {}
    std::string key;
};

struct Preset {
    std::string name;
    double field;  // G
    double rabi;   // MHz
    double angle;  // deg
};
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

// Resolved run configuration. Dimensioned values are held in the canonical
// interface units (G, us, deg, MHz, um) so emission and parsing round-trip
// exactly; the accessors convert to internal units.
struct RunConfig {
    std::string preset = "3000G";  // preset name or "custom"

    struct Atom {
        double gJ = 1.5;
        double gI = -1.0928;
        double A = -260.0;      // MHz
        double Q = -35.0;       // MHz
        double Gamma = 7.48e-3;  // MHz
        double wavelength = 0.689;  // um
        bool operator==(const Atom&) const = default;
    } atom;

    double field = 3000.0;  // G
    double rabi = 30.0;     // MHz
    double angle = 60.0;    // deg
    std::optional<double> detuning;  // MHz; empty = midpoint rule per transition
    double period = 0.5;    // us, for single runs without calibration
    double duration = 50.0;  // us

    bool all_transitions = true;
    std::vector<Transition> transitions;

    struct Scan {
        double start = 0.2;   // us
        double stop = 1.5;    // us
        double step = 0.002;  // us
        double resolution = 1e-4;  // us
        std::string mode = "hybrid";
        double record_threshold = 0.5;
        double screen_threshold = 0.45;
        double fidelity_floor = 0.99;
        bool operator==(const Scan&) const = default;
    } scan;

    struct Integrator {
        std::string method = "magnus4";
        int slices_per_period = 512;
        int slices_per_sample = 4;
        double rtol = 1e-9;
        double atol = 1e-11;
        int threads = 0;
        bool operator==(const Integrator&) const = default;
    } integrator;

    struct Stability {
        std::vector<double> targets = {0.99, 0.999};
        std::vector<Parameter> parameters = all_parameters();
        std::string layout = "aggregate";  // aggregate | per-transition | both
        bool prefilter = true;
        double T = 0.006;     // us
        double B = 30.0;      // G
        double Omega = 0.8;   // MHz
        double theta = 2.0;   // deg
        double Delta = 50.0;  // MHz
        bool operator==(const Stability&) const = default;
    } stability;

    struct Photometry {
        double waist = 50.0;  // um
        bool operator==(const Photometry&) const = default;
    } photometry;

    struct Output {
        std::string path = "results";
        std::string format = "json";  // json | csv
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const RunConfig&) const = default;

    AtomSpec atom_spec() const;
    DriveParams drive() const;  // Delta = explicit detuning or 0
    DriveParams drive_for(const Transition& tr) const;  // Delta from the midpoint rule unless explicit
    std::vector<Transition> selected() const;
    TGrid grid() const;
    EvolveOptions evolve_options() const;
    ScanOptions scan_options() const;
    StabilityOptions stability_options() const;
    ToleranceRequest tolerance_request() const;
    PhotometrySpec photometry_spec() const;
};

// Overrides are "dotted.key" -> scalar text, applied on top of the document
// before defaults are resolved (used by the command line).
using ConfigOverrides = std::map<std::string, std::string>;

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
std::string emit_config(const RunConfig& config);

}  // namespace oner
