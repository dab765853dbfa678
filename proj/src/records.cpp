#include "oner/records.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace oner {

namespace {

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json transition_json(const Transition& t) { return t.str(); }
Transition transition_from(const json& j) { return Transition::parse(j.get<std::string>()); }

std::string threshold_text(const Threshold& th, Parameter p) {
    switch (th.status) {
        case Threshold::Status::ok: return num(to_display(p, th.value));
        case Threshold::Status::not_achievable: return "-";
        case Threshold::Status::exceeds_bound: return ">" + num(to_display(p, th.value));
        case Threshold::Status::below_search_floor: return "<" + num(to_display(p, th.value));
        case Threshold::Status::invalid: return "invalid";
    }
    return "?";
}

}  // namespace

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, std::string("cannot open for writing: ") + std::strerror(errno));
    out << content;
    out.close();
    if (!out) throw IoError(path, "write failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, std::string("cannot open for reading: ") + std::strerror(errno));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string basis_column(const BasisState& s) {
    static const char* names[] = {"1S0_0", "3P1_-1", "3P1_0", "3P1_+1"};
    return std::string(names[static_cast<int>(s.level)]) + "_" + half_integer_str(static_cast<int>(std::lround(2 * s.mI)));
}

std::string trajectory_csv(const Trajectory& traj, const AtomSpec& atom) {
    std::ostringstream os;
    os << "time_us";
    for (int idx : traj.tracked) os << "," << basis_column(basis_state(idx, atom));
    os << "\n";
    os << std::setprecision(12);
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        os << traj.times[r];
        for (long c = 0; c < traj.populations.cols(); ++c) os << "," << traj.populations(static_cast<long>(r), c);
        os << "\n";
    }
    return os.str();
}

std::string scan_csv(const ScanCurve& curve) {
    std::ostringstream os;
    os << "T_ns,probability,peak_flag\n" << std::setprecision(12);
    for (std::size_t i = 0; i < curve.periods.size(); ++i)
        os << curve.periods[i] * 1e3 << "," << curve.probabilities[i] << "," << int(curve.peak_flag[i]) << "\n";
    return os.str();
}

std::string calibration_csv(const CalibrationTable& table) {
    std::ostringstream os;
    os << "transition,T_ns,Delta_MHz,P,t_flip_us,Omega_N_kHz,max_excited,N_sc,status\n" << std::setprecision(12);
    for (const auto& r : table.rows) {
        os << r.transition.str() << ",";
        if (r.ok)
            os << r.peak.T * 1e3 << "," << r.Delta / kMHz << "," << r.peak.P << "," << r.peak.t_flip << ","
               << r.peak.Omega_N / kKHz << "," << r.peak.max_excited << "," << r.scattering.N_sc;
        else
            os << ",,,,,,";
        os << "," << '"' << r.status << '"' << "\n";
    }
    return os.str();
}

std::string tolerance_csv(const ToleranceReport& rep) {
    std::ostringstream os;
    os << "transition,parameter,target,status,value,unit\n" << std::setprecision(12);
    for (const auto& row : rep.rows)
        for (const auto& c : row.cells)
            os << (row.transition ? row.transition->str() : std::string("all")) << "," << to_string(c.parameter) << ","
               << c.target << "," << to_string(c.threshold.status) << ","
               << (c.threshold.status == Threshold::Status::not_achievable ? std::string()
                                                                           : num(to_display(c.parameter, c.threshold.value)))
               << "," << display_unit(c.parameter) << "\n";
    return os.str();
}

std::string format_tolerance_table(const ToleranceReport& rep) {
    std::ostringstream os;
    auto header = [&](const std::string& first) {
        os << std::left << std::setw(14) << first;
        for (Parameter p : rep.parameters)
            os << std::setw(22) << ("|d" + to_string(p) + "| (" + display_unit(p) + ")");
        os << "\n";
    };
    if (rep.aggregated) {
        header("target");
        std::vector<double> t = rep.targets;
        std::sort(t.begin(), t.end(), std::greater<>());
        for (const auto& row : rep.rows)
            for (double target : t) {
                os << std::setw(14) << (fixed(100 * target, 1) + "%");
                for (Parameter p : rep.parameters) {
                    const auto* c = row.find(p, target);
                    os << std::setw(22) << (c ? threshold_text(c->threshold, p) : "");
                }
                os << "\n";
            }
    } else {
        header("transition");
        std::vector<double> t = rep.targets;
        std::sort(t.begin(), t.end(), std::greater<>());
        for (const auto& row : rep.rows) {
            os << std::setw(14) << (row.transition ? row.transition->str() : "all");
            for (Parameter p : rep.parameters) {
                std::string cell;
                for (std::size_t k = 0; k < t.size(); ++k) {
                    const auto* c = row.find(p, t[k]);
                    cell += (k ? " / " : "") + (c ? threshold_text(c->threshold, p) : std::string("?"));
                }
                os << std::setw(22) << cell;
            }
            os << "\n";
        }
        os << "cells: target " ;
        for (std::size_t k = 0; k < t.size(); ++k) os << (k ? " / " : "") << fixed(100 * t[k], 1) << "%";
        os << "; '-' not achievable, '>' exceeds search bound\n";
    }
    return os.str();
}

std::string format_calibration_table(const CalibrationTable& table) {
    std::ostringstream os;
    os << std::left << std::setw(14) << "transition" << std::setw(11) << "T (ns)" << std::setw(14) << "Delta (MHz)"
       << std::setw(10) << "P" << std::setw(12) << "t_pi (us)" << std::setw(14) << "Omega_N (kHz)" << std::setw(10)
       << "P_3P1" << std::setw(10) << "N_sc" << "status\n";
    for (const auto& r : table.rows) {
        os << std::setw(14) << r.transition.str();
        if (r.ok)
            os << std::setw(11) << fixed(r.peak.T * 1e3, 1) << std::setw(14) << fixed(r.Delta / kMHz, 3) << std::setw(10)
               << fixed(r.peak.P, 5) << std::setw(12) << fixed(r.peak.t_flip, 2) << std::setw(14)
               << fixed(r.peak.Omega_N / kKHz, 2) << std::setw(10) << fixed(r.peak.max_excited, 5) << std::setw(10)
               << fixed(r.scattering.N_sc, 5);
        else
            os << std::setw(95) << "";
        os << r.status << "\n";
    }
    return os.str();
}

json to_json(const DriveParams& d) {
    return {{"B_G", d.B},          {"Omega0_rad_per_us", d.Omega0}, {"theta_rad", d.theta},
            {"Delta_rad_per_us", d.Delta}, {"T_us", d.T},            {"tau_us", d.tau}};
}

DriveParams drive_from_json(const json& j) {
    DriveParams d;
    d.B = j.at("B_G").get<double>();
    d.Omega0 = j.at("Omega0_rad_per_us").get<double>();
    d.theta = j.at("theta_rad").get<double>();
    d.Delta = j.at("Delta_rad_per_us").get<double>();
    d.T = j.at("T_us").get<double>();
    d.tau = j.at("tau_us").get<double>();
    return d;
}

json to_json(const Peak& p) {
    return {{"T_us", p.T},           {"P", p.P},
            {"t_flip_us", p.t_flip}, {"Omega_N_rad_per_us", p.Omega_N},
            {"Omega_N_kHz", p.Omega_N / kKHz}, {"max_excited", p.max_excited},
            {"fit_disagreement", p.fit_disagreement}};
}

Peak peak_from_json(const json& j) {
    Peak p;
    p.T = j.at("T_us").get<double>();
    p.P = j.at("P").get<double>();
    p.t_flip = j.at("t_flip_us").get<double>();
    p.Omega_N = j.at("Omega_N_rad_per_us").get<double>();
    p.max_excited = j.at("max_excited").get<double>();
    p.fit_disagreement = j.at("fit_disagreement").get<bool>();
    return p;
}

json to_json(const ScatteringReport& s) {
    return {{"P_excited", s.P_excited}, {"Omega_N_rad_per_us", s.Omega_N}, {"Gamma_rad_per_us", s.Gamma},
            {"N_sc", s.N_sc},           {"bound", s.bound},                {"within_bound", s.within_bound}};
}

ScatteringReport scattering_from_json(const json& j) {
    ScatteringReport s;
    s.P_excited = j.at("P_excited").get<double>();
    s.Omega_N = j.at("Omega_N_rad_per_us").get<double>();
    s.Gamma = j.at("Gamma_rad_per_us").get<double>();
    s.N_sc = j.at("N_sc").get<double>();
    s.bound = j.at("bound").get<double>();
    s.within_bound = j.at("within_bound").get<bool>();
    return s;
}

json to_json(const ScanCurve& c) {
    json peaks = json::array();
    for (const auto& p : c.peaks) peaks.push_back(to_json(p));
    std::vector<int> flags(c.peak_flag.begin(), c.peak_flag.end());
    return {{"transition", transition_json(c.transition)},
            {"Delta_rad_per_us", c.Delta},
            {"mode", c.mode == ScanMode::exact ? "exact" : "hybrid"},
            {"status", c.status},
            {"periods_us", c.periods},
            {"probabilities", c.probabilities},
            {"peak_flag", flags},
            {"peaks", peaks}};
}

ScanCurve scan_from_json(const json& j) {
    ScanCurve c;
    c.transition = transition_from(j.at("transition"));
    c.Delta = j.at("Delta_rad_per_us").get<double>();
    c.mode = j.at("mode").get<std::string>() == "exact" ? ScanMode::exact : ScanMode::hybrid;
    c.status = j.at("status").get<std::string>();
    c.periods = j.at("periods_us").get<std::vector<double>>();
    c.probabilities = j.at("probabilities").get<std::vector<double>>();
    for (int f : j.at("peak_flag").get<std::vector<int>>()) c.peak_flag.push_back(static_cast<char>(f));
    for (const auto& p : j.at("peaks")) c.peaks.push_back(peak_from_json(p));
    return c;
}

json to_json(const CalibrationTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json peaks = json::array();
        for (const auto& p : r.peaks) peaks.push_back(to_json(p));
        rows.push_back({{"transition", transition_json(r.transition)},
                        {"ok", r.ok},
                        {"status", r.status},
                        {"Delta_rad_per_us", r.Delta},
                        {"Delta_MHz", r.Delta / kMHz},
                        {"residual_lower_rad_per_us", r.residual.lower},
                        {"residual_upper_rad_per_us", r.residual.upper},
                        {"peak", to_json(r.peak)},
                        {"peaks", peaks},
                        {"scattering", to_json(r.scattering)}});
    }
    return {{"drive", to_json(t.drive)}, {"fidelity_floor", t.fidelity_floor}, {"rows", rows}};
}

CalibrationTable calibration_from_json(const json& j) {
    CalibrationTable t;
    t.drive = drive_from_json(j.at("drive"));
    t.fidelity_floor = j.at("fidelity_floor").get<double>();
    for (const auto& r : j.at("rows")) {
        CalibrationRow row;
        row.transition = transition_from(r.at("transition"));
        row.ok = r.at("ok").get<bool>();
        row.status = r.at("status").get<std::string>();
        row.Delta = r.at("Delta_rad_per_us").get<double>();
        row.residual.lower = r.at("residual_lower_rad_per_us").get<double>();
        row.residual.upper = r.at("residual_upper_rad_per_us").get<double>();
        row.peak = peak_from_json(r.at("peak"));
        for (const auto& p : r.at("peaks")) row.peaks.push_back(peak_from_json(p));
        row.scattering = scattering_from_json(r.at("scattering"));
        t.rows.push_back(std::move(row));
    }
    return t;
}

json to_json(const ToleranceReport& r) {
    json points = json::array();
    for (const auto& op : r.points) points.push_back({{"transition", transition_json(op.transition)}, {"drive", to_json(op.drive)}});
    json params = json::array();
    for (Parameter p : r.parameters) params.push_back(to_string(p));
    json rows = json::array();
    for (const auto& row : r.rows) {
        json cells = json::array();
        for (const auto& c : row.cells)
            cells.push_back({{"parameter", to_string(c.parameter)},
                             {"target", c.target},
                             {"status", to_string(c.threshold.status)},
                             {"value", c.threshold.value},
                             {"display_value", to_display(c.parameter, c.threshold.value)},
                             {"display_unit", display_unit(c.parameter)},
                             {"probes", c.threshold.probes},
                             {"message", c.threshold.message}});
        rows.push_back({{"transition", row.transition ? json(row.transition->str()) : json(nullptr)},
                        {"P0", row.P0},
                        {"cells", cells}});
    }
    return {{"aggregated", r.aggregated}, {"valid", r.valid},  {"error", r.error}, {"targets", r.targets},
            {"parameters", params},       {"points", points}, {"rows", rows}};
}

ToleranceReport tolerance_from_json(const json& j) {
    ToleranceReport r;
    r.aggregated = j.at("aggregated").get<bool>();
    r.valid = j.at("valid").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.targets = j.at("targets").get<std::vector<double>>();
    for (const auto& p : j.at("parameters")) r.parameters.push_back(parse_parameter(p.get<std::string>()));
    for (const auto& op : j.at("points")) r.points.push_back({transition_from(op.at("transition")), drive_from_json(op.at("drive"))});
    for (const auto& row : j.at("rows")) {
        ToleranceRow tr;
        if (!row.at("transition").is_null()) tr.transition = transition_from(row.at("transition"));
        tr.P0 = row.at("P0").get<double>();
        for (const auto& c : row.at("cells")) {
            ToleranceCell cell;
            cell.parameter = parse_parameter(c.at("parameter").get<std::string>());
            cell.target = c.at("target").get<double>();
            cell.threshold.status = parse_threshold_status(c.at("status").get<std::string>());
            cell.threshold.value = c.at("value").get<double>();
            cell.threshold.probes = c.at("probes").get<int>();
            cell.threshold.message = c.at("message").get<std::string>();
            tr.cells.push_back(cell);
        }
        r.rows.push_back(std::move(tr));
    }
    return r;
}

json to_json(const Trajectory& t, const AtomSpec& atom) {
    double pe = 0.0;
    for (double v : t.excited) pe = std::max(pe, v);
    json cols = json::array();
    for (int i : t.tracked) cols.push_back(basis_column(basis_state(i, atom)));
    return {{"drive", to_json(t.params)},
            {"samples", t.times.size()},
            {"columns", cols},
            {"max_excited", pe},
            {"method", to_string(t.stats.method)},
            {"slices_per_period", t.stats.slices_per_period},
            {"steps", t.stats.steps},
            {"max_trace_error", t.stats.max_trace_error},
            {"max_hermiticity_error", t.stats.max_hermiticity_error},
            {"min_eigenvalue", t.stats.min_eigenvalue},
            {"jump_weight_fallbacks", t.stats.jump_weight_fallbacks}};
}

json to_json(const RabiEstimate& e) {
    return {{"status", e.status == RabiEstimate::Status::ok ? "ok" : "no oscillation"},
            {"Omega_N_rad_per_us", e.Omega_N},
            {"Omega_N_kHz", e.Omega_N / kKHz},
            {"t_pi_us", e.t_pi},
            {"fit_used", e.fit_used},
            {"fit_Omega_rad_per_us", e.fit_Omega},
            {"fit_disagreement", e.fit_disagreement}};
}

json make_record(const std::string& kind, const RunConfig& config, const json& payload) {
    const auto ev = config.evolve_options();
    return {{"schema", kSchemaVersion},
            {"kind", kind},
            {"config", emit_config(config)},
            {"payload", payload},
            {"provenance",
             {{"created_utc", utc_now()},
              {"tool_version", kToolVersion},
              {"integrator",
               {{"method", to_string(ev.method)},
                {"slices_per_period", ev.min_slices_per_period},
                {"slices_per_sample", ev.slices_per_sample},
                {"rtol", ev.rtol},
                {"atol", ev.atol}}}}}};
}

ResultRecord parse_record(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("invalid JSON record: ") + e.what());
    }
    ResultRecord r;
    r.schema = j.value("schema", "");
    if (r.schema != kSchemaVersion)
        throw std::invalid_argument("unsupported record schema '" + r.schema + "' (expected " + kSchemaVersion + ")");
    r.kind = j.at("kind").get<std::string>();
    r.config_yaml = j.at("config").get<std::string>();
    r.payload = j.at("payload");
    r.provenance = j.at("provenance");
    return r;
}

}  // namespace oner
