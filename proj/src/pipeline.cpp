#include "oner/pipeline.hpp"

#include <algorithm>

namespace oner {

std::vector<ScanResult> run_scan(const RunConfig& config) {
    const AtomSpec atom = config.atom_spec();
    const TGrid grid = config.grid();
    const ScanOptions opts = config.scan_options();
    std::vector<ScanResult> out;
    for (const Transition& tr : config.selected()) {
        ScanResult r;
        r.transition = tr;
        try {
            const DriveParams d = config.drive_for(tr);
            r.Delta = d.Delta;
            r.curve = scan_modulation_period(atom, d, tr, grid, opts);
            r.ok = r.curve.status == "ok";
            r.status = r.curve.status;
        } catch (const RegimeError& e) {
            r.status = e.what();
        } catch (const IntegrationError& e) {
            r.status = std::string("integration failure: ") + e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

bool CalibrationTable::complete() const {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CalibrationRow& r) { return r.ok; });
}

std::vector<OperatingPoint> CalibrationTable::operating_points() const {
    std::vector<OperatingPoint> pts;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        DriveParams d = drive;
        d.Delta = r.Delta;
        d.T = r.peak.T;
        pts.push_back({r.transition, d});
    }
    return pts;
}

const CalibrationRow* CalibrationTable::find(const Transition& tr) const {
    for (const auto& r : rows)
        if (r.transition == tr) return &r;
    return nullptr;
}

CalibrationTable calibrate_from_scans(const RunConfig& config, const std::vector<ScanResult>& scans) {
    const AtomSpec atom = config.atom_spec();
    CalibrationTable table;
    table.drive = config.drive();
    table.drive.Delta = 0.0;
    table.fidelity_floor = config.scan.fidelity_floor;
    for (const ScanResult& s : scans) {
        CalibrationRow row;
        row.transition = s.transition;
        row.Delta = s.Delta;
        row.status = s.status;
        if (s.ok) {
            row.residual = residual_detunings(atom, table.drive.B, s.transition, s.Delta);
            row.peaks = s.curve.peaks;
            const FirstPeak fp = first_peak(s.curve, table.fidelity_floor);
            row.status = fp.message;
            if (fp.found) {
                row.ok = true;
                row.peak = fp.peak;
                row.scattering = scattering_estimate(fp.peak.max_excited, fp.peak.Omega_N, atom.Gamma);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CalibrationTable run_calibrate(const RunConfig& config, std::vector<ScanResult>* scans) {
    std::vector<ScanResult> s = run_scan(config);
    CalibrationTable t = calibrate_from_scans(config, s);
    if (scans) *scans = std::move(s);
    return t;
}

std::vector<RabiResult> run_rabi(const RunConfig& config, const CalibrationTable* calibration) {
    const AtomSpec atom = config.atom_spec();
    const EvolveOptions opts = config.evolve_options();
    std::vector<RabiResult> out;
    for (const Transition& tr : config.selected()) {
        RabiResult r;
        r.transition = tr;
        try {
            DriveParams d = config.drive_for(tr);
            if (calibration) {
                const CalibrationRow* row = calibration->find(tr);
                if (!row || !row->ok) {
                    r.status = "no calibrated operating point";
                    out.push_back(std::move(r));
                    continue;
                }
                d = calibration->drive;
                d.Delta = row->Delta;
                d.T = row->peak.T;
            }
            const BasisState init{Level::S0, tr.mI()}, target{Level::S0, tr.mI() + 1};
            r.trajectory = evolve(atom, d, pure_density(basis_index(init, atom), atom.dim()), {}, opts);
            const PopulationSeries p = population(r.trajectory, target, atom);
            r.P = *std::max_element(p.values.begin(), p.values.end());
            r.estimate = nuclear_rabi_frequency(r.trajectory.times, p.values);
            r.scattering = scattering_estimate(r.trajectory, r.estimate.Omega_N, atom);
            r.ok = true;
            r.status = r.estimate.status == RabiEstimate::Status::ok ? "ok" : "no oscillation";
        } catch (const RegimeError& e) {
            r.status = e.what();
        } catch (const IntegrationError& e) {
            r.status = std::string("integration failure: ") + e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

bool StabilityResult::complete() const {
    auto ok = [](const std::optional<ToleranceReport>& r) { return !r || r->valid; };
    return missing.empty() && ok(aggregate) && ok(per_transition);
}

StabilityResult run_stability(const RunConfig& config, const CalibrationTable& calibration) {
    const AtomSpec atom = config.atom_spec();
    StabilityResult res;
    std::vector<OperatingPoint> pts;
    for (const Transition& tr : config.selected()) {
        const CalibrationRow* row = calibration.find(tr);
        if (!row || !row->ok) {
            res.missing.push_back(tr);
            continue;
        }
        DriveParams d = calibration.drive;
        d.Delta = row->Delta;
        d.T = row->peak.T;
        pts.push_back({tr, d});
    }
    if (pts.empty()) return res;
    const ToleranceRequest req = config.tolerance_request();
    const StabilityOptions opts = config.stability_options();
    const std::string& layout = config.stability.layout;
    if (layout == "aggregate" || layout == "both") res.aggregate = aggregate_tolerance_table(atom, pts, req, opts);
    if (layout == "per-transition" || layout == "both")
        res.per_transition = per_transition_tolerance_table(atom, pts, req, opts);
    return res;
}

}  // namespace oner
