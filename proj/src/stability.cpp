#include "oner/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "oner/parallel.hpp"
#include "oner/photometry.hpp"

namespace oner {

namespace {

constexpr double kDeg = M_PI / 180.0;

int index_of(const AtomSpec& atom, double mI) { return basis_index({Level::S0, mI}, atom); }

double round_down_2sig(double x) {
    if (!(x > 0.0)) return 0.0;
    const double scale = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
    return std::floor(x / scale * (1.0 + 1e-12)) * scale;
}

// One signed probe of one operating point.
bool run_passes(const AtomSpec& atom, const OperatingPoint& op, const PerturbationSpec& p, double target,
                const StabilityOptions& options) {
    const DriveParams d = apply_perturbation(op.drive, p);
    const int init = index_of(atom, op.transition.mI());
    const int tgt = index_of(atom, op.transition.mI() + 1);
    if (options.pure_prefilter && options.evolve.method == Method::magnus4) {
        // the no-jump population is a lower bound on the density-matrix one
        if (evolve_pure(atom, d, init, tgt, options.evolve).max_target >= target) return true;
    }
    return evolve_target(atom, d, init, tgt, options.evolve, false, target).max_target >= target;
}

}  // namespace

std::string to_string(Parameter p) {
    switch (p) {
        case Parameter::T: return "T";
        case Parameter::B: return "B";
        case Parameter::Omega: return "Omega";
        case Parameter::theta: return "theta";
        case Parameter::Delta: return "Delta";
    }
    return "?";
}

Parameter parse_parameter(const std::string& name) {
    for (Parameter p : all_parameters())
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown perturbation parameter '" + name + "' (expected T, B, Omega, theta or Delta)");
}

std::vector<Parameter> all_parameters() {
    return {Parameter::T, Parameter::B, Parameter::Omega, Parameter::theta, Parameter::Delta};
}

std::string display_unit(Parameter p) {
    switch (p) {
        case Parameter::T: return "ns";
        case Parameter::B: return "mG";
        case Parameter::Omega: return "kHz";
        case Parameter::theta: return "deg";
        case Parameter::Delta: return "kHz";
    }
    return "";
}

double to_display(Parameter p, double v) {
    switch (p) {
        case Parameter::T: return v * 1e3;
        case Parameter::B: return v * 1e3;
        case Parameter::Omega:
        case Parameter::Delta: return v / kKHz;
        case Parameter::theta: return v / kDeg;
    }
    return v;
}

double from_display(Parameter p, double v) {
    switch (p) {
        case Parameter::T: return v * 1e-3;
        case Parameter::B: return v * 1e-3;
        case Parameter::Omega:
        case Parameter::Delta: return v * kKHz;
        case Parameter::theta: return v * kDeg;
    }
    return v;
}

void PerturbationSpec::validate() const {
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) throw std::invalid_argument("perturbation magnitude must be >= 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("perturbation sign must be +1 or -1");
}

DriveParams apply_perturbation(const DriveParams& drive, const PerturbationSpec& p) {
    p.validate();
    DriveParams d = drive;
    const double s = p.sign * p.magnitude;
    switch (p.parameter) {
        case Parameter::T: d.T += s; break;
        case Parameter::B: d.B += s; break;
        case Parameter::Omega: d.Omega0 += s; break;
        case Parameter::theta: d.theta += s; break;
        case Parameter::Delta: d.Delta += s; break;
    }
    d.validate();
    return d;
}

PerturbationSpec intensity_noise_perturbation(double rel, double Omega0, int sign) {
    return {Parameter::Omega, intensity_noise_to_rabi_noise(rel) * Omega0, sign};
}

FidelitySet min_fidelity(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                         const PerturbationSpec& perturbation, const StabilityOptions& options) {
    FidelitySet out;
    for (const auto& op : points) out.transitions.push_back(op.transition);
    if (points.empty()) {
        out.error = "no operating points";
        return out;
    }
    try {
        out.P = parallel_map(
            points.size(),
            [&](std::size_t i) {
                const DriveParams d = apply_perturbation(points[i].drive, perturbation);
                const int init = index_of(atom, points[i].transition.mI());
                const int tgt = index_of(atom, points[i].transition.mI() + 1);
                return evolve_target(atom, d, init, tgt, options.evolve).max_target;
            },
            options.threads);
        out.P_min = *std::min_element(out.P.begin(), out.P.end());
        out.valid = true;
    } catch (const std::exception& e) {
        out.P.clear();
        out.error = e.what();
    }
    return out;
}

bool probe_passes(const AtomSpec& atom, const std::vector<OperatingPoint>& points, Parameter parameter,
                  double magnitude, double target, const StabilityOptions& options) {
    const int signs = magnitude > 0.0 ? 2 : 1;
    const std::size_t n = points.size() * signs;
    std::atomic<bool> failed{false};
    parallel_map(
        n,
        [&](std::size_t k) {
            if (failed.load()) return 0;
            const PerturbationSpec p{parameter, magnitude, k % signs == 0 ? +1 : -1};
            if (!run_passes(atom, points[k / signs], p, target, options)) failed.store(true);
            return 0;
        },
        options.threads);
    return !failed.load();
}

std::string to_string(Threshold::Status s) {
    switch (s) {
        case Threshold::Status::ok: return "ok";
        case Threshold::Status::not_achievable: return "not achievable";
        case Threshold::Status::exceeds_bound: return "exceeds search bound";
        case Threshold::Status::below_search_floor: return "below search floor";
        case Threshold::Status::invalid: return "invalid";
    }
    return "invalid";
}

Threshold::Status parse_threshold_status(const std::string& s) {
    for (auto st : {Threshold::Status::ok, Threshold::Status::not_achievable, Threshold::Status::exceeds_bound,
                    Threshold::Status::below_search_floor, Threshold::Status::invalid})
        if (to_string(st) == s) return st;
    throw std::invalid_argument("unknown threshold status '" + s + "'");
}

Threshold tolerance_threshold(const AtomSpec& atom, const std::vector<OperatingPoint>& points, Parameter parameter,
                              double target, const ToleranceSearch& search, const StabilityOptions& options) {
    Threshold th;
    if (!(search.bound > 0.0) || !(search.floor_ratio > 0.0 && search.floor_ratio < 1.0) || !(search.resolution > 1.0)) {
        th.message = "invalid search settings";
        return th;
    }
    auto test = [&](double m) {
        ++th.probes;
        return probe_passes(atom, points, parameter, m, target, options);
    };
    try {
        if (!search.known_pass && !test(0.0)) {
            th.status = Threshold::Status::not_achievable;
            th.message = "target not reached without perturbation";
            return th;
        }
        if ((search.known_pass && *search.known_pass >= search.bound) || test(search.bound)) {
            th.status = Threshold::Status::exceeds_bound;
            th.value = search.bound;
            th.message = "target met at the search bound";
            return th;
        }
        const double floor = search.bound * search.floor_ratio;
        double lo = 0.0, hi = search.bound;
        if (search.known_pass && *search.known_pass >= floor) {
            lo = *search.known_pass;
        } else if (test(floor)) {
            lo = floor;
        } else {
            th.status = Threshold::Status::below_search_floor;
            th.value = floor;
            th.message = "target missed at the search floor";
            return th;
        }
        while (hi / lo >= search.resolution) {
            const double mid = std::sqrt(lo * hi);
            (test(mid) ? lo : hi) = mid;
        }
        double reported = from_display(parameter, round_down_2sig(to_display(parameter, lo)));
        for (int attempt = 0; attempt < 8; ++attempt) {
            if (test(reported)) {
                th.status = Threshold::Status::ok;
                th.value = reported;
                th.message = "ok";
                return th;
            }
            reported = from_display(parameter, round_down_2sig(0.9 * to_display(parameter, reported)));
        }
        th.message = "verification probe failed at every candidate value";
    } catch (const std::exception& e) {
        th.status = Threshold::Status::invalid;
        th.message = e.what();
    }
    return th;
}

double SearchBounds::get(Parameter p) const {
    switch (p) {
        case Parameter::T: return T;
        case Parameter::B: return B;
        case Parameter::Omega: return Omega;
        case Parameter::theta: return theta;
        case Parameter::Delta: return Delta;
    }
    return 0.0;
}

void SearchBounds::set(Parameter p, double v) {
    switch (p) {
        case Parameter::T: T = v; break;
        case Parameter::B: B = v; break;
        case Parameter::Omega: Omega = v; break;
        case Parameter::theta: theta = v; break;
        case Parameter::Delta: Delta = v; break;
    }
}

SearchBounds default_search_bounds(double B_gauss) {
    SearchBounds b;
    if (B_gauss < 2500.0) {
        b.T = 0.040;
        b.B = 1.0;
        b.Omega = 0.8 * kMHz;
        b.theta = 10.0 * kDeg;
        b.Delta = 5.0 * kMHz;
    }
    return b;
}

const ToleranceCell* ToleranceRow::find(Parameter p, double target) const {
    for (const auto& c : cells)
        if (c.parameter == p && std::abs(c.target - target) < 1e-12) return &c;
    return nullptr;
}

bool ToleranceReport::ordering_holds() const {
    std::vector<double> t = targets;
    std::sort(t.begin(), t.end());
    auto effective = [](const Threshold& th) {
        switch (th.status) {
            case Threshold::Status::ok:
            case Threshold::Status::below_search_floor: return th.value;
            case Threshold::Status::exceeds_bound: return std::numeric_limits<double>::infinity();
            default: return -1.0;
        }
    };
    for (const auto& row : rows)
        for (Parameter p : parameters)
            for (std::size_t i = 1; i < t.size(); ++i) {
                const auto* lo = row.find(p, t[i - 1]);
                const auto* hi = row.find(p, t[i]);
                if (!lo || !hi) continue;
                if (hi->threshold.status == Threshold::Status::not_achievable) continue;
                if (hi->threshold.status == Threshold::Status::invalid || lo->threshold.status == Threshold::Status::invalid)
                    continue;
                if (effective(hi->threshold) > effective(lo->threshold)) return false;
                if (hi->threshold.status == Threshold::Status::exceeds_bound &&
                    lo->threshold.status == Threshold::Status::exceeds_bound)
                    continue;
            }
    return true;
}

namespace {

ToleranceRow build_row(const AtomSpec& atom, const std::vector<OperatingPoint>& pts, const ToleranceRequest& req,
                       const StabilityOptions& options, std::optional<Transition> transition, std::string& error) {
    ToleranceRow row;
    row.transition = transition;
    const FidelitySet base = min_fidelity(atom, pts, {Parameter::T, 0.0, +1}, options);
    if (!base.valid) {
        error = base.error;
        return row;
    }
    row.P0 = base.P_min;
    std::vector<double> targets = req.targets;
    std::sort(targets.begin(), targets.end(), std::greater<>());
    for (Parameter p : req.parameters) {
        std::optional<double> known;
        for (double target : targets) {
            ToleranceCell cell{p, target, {}};
            if (row.P0 < target) {
                cell.threshold.status = Threshold::Status::not_achievable;
                cell.threshold.message = "target not reached without perturbation";
            } else {
                ToleranceSearch s;
                s.bound = req.bounds.get(p);
                s.known_pass = known;
                cell.threshold = tolerance_threshold(atom, pts, p, target, s, options);
                if (cell.threshold.status == Threshold::Status::ok ||
                    cell.threshold.status == Threshold::Status::exceeds_bound)
                    known = cell.threshold.value;
            }
            row.cells.push_back(cell);
        }
    }
    std::sort(row.cells.begin(), row.cells.end(), [&](const ToleranceCell& a, const ToleranceCell& b) {
        if (a.parameter != b.parameter) return a.parameter < b.parameter;
        return a.target < b.target;
    });
    return row;
}

}  // namespace

ToleranceReport aggregate_tolerance_table(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                                          const ToleranceRequest& request, const StabilityOptions& options) {
    ToleranceReport rep;
    rep.points = points;
    rep.targets = request.targets;
    rep.parameters = request.parameters;
    rep.aggregated = true;
    std::string err;
    rep.rows.push_back(build_row(atom, points, request, options, std::nullopt, err));
    if (!err.empty()) rep.valid = false, rep.error = err;
    return rep;
}

ToleranceReport per_transition_tolerance_table(const AtomSpec& atom, const std::vector<OperatingPoint>& points,
                                               const ToleranceRequest& request, const StabilityOptions& options) {
    ToleranceReport rep;
    rep.points = points;
    rep.targets = request.targets;
    rep.parameters = request.parameters;
    for (const auto& op : points) {
        std::string err;
        rep.rows.push_back(build_row(atom, {op}, request, options, op.transition, err));
        if (!err.empty()) {
            rep.valid = false;
            rep.error += op.transition.str() + ": " + err + "; ";
        }
    }
    return rep;
}

ScatteringReport scattering_estimate(double P_excited, double Omega_N, double Gamma) {
    ScatteringReport r;
    r.P_excited = P_excited;
    r.Omega_N = Omega_N;
    r.Gamma = Gamma;
    r.N_sc = (Gamma == 0.0 || P_excited == 0.0) ? 0.0 : P_excited * Gamma / Omega_N;
    r.within_bound = std::isfinite(r.N_sc) && r.N_sc < r.bound;
    return r;
}

ScatteringReport scattering_estimate(const Trajectory& traj, double Omega_N, const AtomSpec& atom) {
    double pe = 0.0;
    for (double v : traj.excited) pe = std::max(pe, v);
    return scattering_estimate(pe, Omega_N, atom.Gamma);
}

}  // namespace oner
