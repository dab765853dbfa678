#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "oner/pipeline.hpp"

namespace oner {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "oner-result/1";
inline constexpr const char* kToolVersion = "0.1.0";

class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what), path(path) {}
    std::string path;
};

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// CSV column names for basis states, e.g. "1S0_0_-9/2", "3P1_+1_+1/2".
std::string basis_column(const BasisState& s);

// time_us followed by one population column per tracked basis state.
std::string trajectory_csv(const Trajectory& traj, const AtomSpec& atom = {});
// T_ns, probability, peak_flag
std::string scan_csv(const ScanCurve& curve);
// transition, T_ns, Delta_MHz, P, t_flip_us, Omega_N_kHz, max_excited, N_sc, status
std::string calibration_csv(const CalibrationTable& table);
// transition (or "all"), parameter, target, status, value, unit
std::string tolerance_csv(const ToleranceReport& report);

// Human-readable tables in the layout of the published tolerance tables.
std::string format_tolerance_table(const ToleranceReport& report);
std::string format_calibration_table(const CalibrationTable& table);

json to_json(const DriveParams& d);
DriveParams drive_from_json(const json& j);
json to_json(const Peak& p);
Peak peak_from_json(const json& j);
json to_json(const ScatteringReport& s);
ScatteringReport scattering_from_json(const json& j);
json to_json(const ScanCurve& c);
ScanCurve scan_from_json(const json& j);
json to_json(const CalibrationTable& t);
CalibrationTable calibration_from_json(const json& j);
json to_json(const ToleranceReport& r);
ToleranceReport tolerance_from_json(const json& j);
json to_json(const Trajectory& t, const AtomSpec& atom = {});  // summary without the full series
json to_json(const RabiEstimate& e);

// Versioned envelope: schema, kind, resolved config snapshot, payload and
// provenance. Only provenance carries wall-clock data.
json make_record(const std::string& kind, const RunConfig& config, const json& payload);

struct ResultRecord {
    std::string schema;
    std::string kind;
    std::string config_yaml;
    json payload;
    json provenance;
};
ResultRecord parse_record(const std::string& text);

}  // namespace oner
