#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oner/scan.hpp"

namespace oner {

// The five quasi-static perturbations. Magnitudes are in internal units:
// T in us, B in G, Omega and Delta in rad/us, theta in rad.
enum class Parameter { T, B, Omega, theta, Delta };

std::string to_string(Parameter p);
Parameter parse_parameter(const std::string& name);
std::vector<Parameter> all_parameters();

// Report units: ns, mG, kHz (Omega/2pi), deg, kHz (Delta/2pi).
std::string display_unit(Parameter p);
double to_display(Parameter p, double internal);
double from_display(Parameter p, double value);

struct PerturbationSpec {
    Parameter parameter = Parameter::T;
    double magnitude = 0.0;
    int sign = +1;
    void validate() const;
};

// Changing B keeps Delta (the laser frequency) fixed.
DriveParams apply_perturbation(const DriveParams& drive, const PerturbationSpec& p);

// Perturbation of Omega0 equivalent to a relative intensity deviation.
PerturbationSpec intensity_noise_perturbation(double relative_intensity_noise, double Omega0, int sign = +1);

// A calibrated drive (T* and Delta* of its own transition).
struct OperatingPoint {
    Transition transition;
    DriveParams drive;
};

struct StabilityOptions {
    EvolveOptions evolve;
    unsigned threads = 0;
    bool pure_prefilter = true;  // accept a probe run when the no-jump lower bound already passes
};

struct FidelitySet {
    std::vector<Transition> transitions;
    std::vector<double> P;  // per transition, same order as the operating points
    double P_min = 0.0;
    bool valid = false;
    std::string error;
};

FidelitySet min_fidelity(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                         const PerturbationSpec& perturbation, const StabilityOptions& options = {});

// True when every operating point reaches target under +magnitude and -magnitude.
bool probe_passes(const AtomSpec& atom, const std::vector<OperatingPoint>& points, Parameter parameter,
                  double magnitude, double target, const StabilityOptions& options = {});

struct ToleranceSearch {
    double bound = 0.0;             // internal units
    double floor_ratio = 1.0 / 1024;  // search starts at bound * floor_ratio
    double resolution = 1.02;         // stop when hi / lo < resolution
    std::optional<double> known_pass;  // magnitude already certified for this target
};

struct Threshold {
    enum class Status { ok, not_achievable, exceeds_bound, below_search_floor, invalid };
    Status status = Status::invalid;
    double value = 0.0;  // internal units; the bound for exceeds_bound, the floor for below_search_floor
    int probes = 0;
    std::string message;
};
std::string to_string(Threshold::Status s);
Threshold::Status parse_threshold_status(const std::string& s);

Threshold tolerance_threshold(const AtomSpec& atom, const std::vector<OperatingPoint>& points, Parameter parameter,
                              double target, const ToleranceSearch& search, const StabilityOptions& options = {});

struct SearchBounds {
    double T = 0.006;
    double B = 30.0;
    double Omega = 0.8 * kMHz;
    double theta = 2.0 * M_PI / 180.0;
    double Delta = 50.0 * kMHz;
    double get(Parameter p) const;
    void set(Parameter p, double v);
};
SearchBounds default_search_bounds(double B_gauss);

struct ToleranceCell {
    Parameter parameter = Parameter::T;
    double target = 0.99;
    Threshold threshold;
};

struct ToleranceRow {
    std::optional<Transition> transition;  // empty for the minimum over all points
    double P0 = 0.0;                       // unperturbed minimum flip probability of the row
    std::vector<ToleranceCell> cells;
    const ToleranceCell* find(Parameter p, double target) const;
};

struct ToleranceReport {
    std::vector<OperatingPoint> points;
    std::vector<double> targets;
    std::vector<Parameter> parameters;
    std::vector<ToleranceRow> rows;
    bool aggregated = false;  // single P_min row instead of one row per transition
    bool valid = true;
    std::string error;

    // threshold(higher target) <= threshold(lower target) for every row and parameter
    bool ordering_holds() const;
};

struct ToleranceRequest {
    std::vector<Parameter> parameters = all_parameters();
    std::vector<double> targets = {0.99, 0.999};
    SearchBounds bounds;
};

// One P_min row over all points.
ToleranceReport aggregate_tolerance_table(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                                          const ToleranceRequest& request, const StabilityOptions& options = {});
// One row per operating point.
ToleranceReport per_transition_tolerance_table(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                                               const ToleranceRequest& request, const StabilityOptions& options = {});

struct ScatteringReport {
    double P_excited = 0.0;  // max total 3P1 population
    double Omega_N = 0.0;
    double Gamma = 0.0;
    double N_sc = 0.0;       // P_excited Gamma / Omega_N
    double bound = 0.004;
    bool within_bound = false;
};
ScatteringReport scattering_estimate(double P_excited, double Omega_N, double Gamma);
ScatteringReport scattering_estimate(const Trajectory& traj, double Omega_N, const AtomSpec& atom = {});

}  // namespace oner
