#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oner/config.hpp"

namespace oner {

// Per-transition outcome of a period scan. A transition whose detuning cannot
// be assigned (regime failure) carries the message and no curve.
struct ScanResult {
    Transition transition;
    bool ok = false;
    std::string status;
    double Delta = 0.0;
    ScanCurve curve;
};

std::vector<ScanResult> run_scan(const RunConfig& config);

struct CalibrationRow {
    Transition transition;
    bool ok = false;
    std::string status;  // "ok" or the reason no operating point exists
    double Delta = 0.0;
    ResidualDetunings residual;
    Peak peak;                 // first peak at or above the fidelity floor
    std::vector<Peak> peaks;   // every recorded peak of the scan
    ScatteringReport scattering;
};

struct CalibrationTable {
    DriveParams drive;  // template; per-row Delta and peak T complete it
    double fidelity_floor = 0.99;
    std::vector<CalibrationRow> rows;

    bool complete() const;
    std::vector<OperatingPoint> operating_points() const;  // ok rows only
    const CalibrationRow* find(const Transition& tr) const;
};

CalibrationTable calibrate_from_scans(const RunConfig& config, const std::vector<ScanResult>& scans);
CalibrationTable run_calibrate(const RunConfig& config, std::vector<ScanResult>* scans = nullptr);

struct RabiResult {
    Transition transition;
    bool ok = false;
    std::string status;
    Trajectory trajectory;
    RabiEstimate estimate;
    ScatteringReport scattering;
    double P = 0.0;
};

// Full trajectories at the calibrated point when a calibration is given,
// otherwise at the configured period with the midpoint-rule detuning.
std::vector<RabiResult> run_rabi(const RunConfig& config, const CalibrationTable* calibration = nullptr);

struct StabilityResult {
    std::optional<ToleranceReport> aggregate;
    std::optional<ToleranceReport> per_transition;
    std::vector<Transition> missing;  // requested but without an operating point
    bool complete() const;
};

StabilityResult run_stability(const RunConfig& config, const CalibrationTable& calibration);

}  // namespace oner
