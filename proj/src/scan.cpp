#include "oner/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "oner/parallel.hpp"

namespace oner {

namespace {

struct Indices {
    int init, target;
};

Indices transition_indices(const AtomSpec& atom, const Transition& tr) {
    if (tr.two_mI < -atom.I.two_j() || tr.two_mI > atom.I.two_j() - 2)
        throw std::invalid_argument("transition " + tr.str() + " is not valid");
    return {basis_index({Level::S0, tr.mI()}, atom), basis_index({Level::S0, tr.mI() + 1}, atom)};
}

struct Probe {
    double T = 0.0;
    TargetRun run;
};

Probe run_density_at(const AtomSpec& atom, DriveParams d, const Indices& ix, double T, const EvolveOptions& opt) {
    d.T = T;
    return {T, evolve_target(atom, d, ix.init, ix.target, opt, true)};
}

// Golden-section maximisation of the density-matrix flip probability on [a, b].
Probe refine(const AtomSpec& atom, const DriveParams& d, const Indices& ix, double a, double b, double resolution,
             const EvolveOptions& opt) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    Probe best;
    best.run.max_target = -1.0;
    auto eval = [&](double T) {
        Probe p = run_density_at(atom, d, ix, T, opt);
        if (p.run.max_target > best.run.max_target) best = p;
        return p.run.max_target;
    };
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = eval(c), fe = eval(e);
    while (b - a > resolution) {
        if (fc >= fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = eval(e);
        }
    }
    return best;
}

}  // namespace

FlipResult flip_probability(const AtomSpec& atom, const DriveParams& drive, const Transition& tr,
                            const EvolveOptions& options) {
    const Indices ix = transition_indices(atom, tr);
    const TargetRun r = evolve_target(atom, drive, ix.init, ix.target, options);
    return {r.max_target, r.t_max, r.max_excited, r.max_trace_error};
}

std::vector<double> TGrid::values() const {
    validate();
    std::vector<double> v;
    const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(start + k * step);
    return v;
}

void TGrid::validate() const {
    if (!(start > 0) || !(stop >= start) || !(step > 0)) throw std::invalid_argument("T grid must satisfy 0 < start <= stop and step > 0");
    if ((stop - start) / step > 1e6) throw std::invalid_argument("T grid has too many points");
}

ScanCurve scan_modulation_period(const AtomSpec& atom, const DriveParams& drive_template, const Transition& tr,
                                 const TGrid& grid, const ScanOptions& options) {
    const Indices ix = transition_indices(atom, tr);
    ScanCurve curve;
    curve.transition = tr;
    curve.mode = options.mode;
    curve.Delta = drive_template.Delta;
    curve.periods = grid.values();
    const std::size_t n = curve.periods.size();

    curve.probabilities = parallel_map(
        n,
        [&](std::size_t i) {
            DriveParams d = drive_template;
            d.T = curve.periods[i];
            const TargetRun r = options.mode == ScanMode::exact
                                    ? evolve_target(atom, d, ix.init, ix.target, options.evolve)
                                    : evolve_pure(atom, d, ix.init, ix.target, options.evolve);
            return std::clamp(r.max_target, 0.0, 1.0);
        },
        options.threads);
    curve.peak_flag.assign(n, 0);

    const auto& p = curve.probabilities;
    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 || p[i] >= p[i - 1];
        const bool right = i + 1 == n || p[i] > p[i + 1];
        if (left && right && p[i] >= options.screen_threshold) seeds.push_back(i);
    }

    auto refined = parallel_map(
        seeds.size(),
        [&](std::size_t s) {
            const std::size_t i = seeds[s];
            const double a = curve.periods[i == 0 ? 0 : i - 1];
            const double b = curve.periods[i + 1 == n ? n - 1 : i + 1];
            if (b - a <= options.resolution) return run_density_at(atom, drive_template, ix, curve.periods[i], options.evolve);
            return refine(atom, drive_template, ix, a, b, options.resolution, options.evolve);
        },
        options.threads);

    std::vector<std::pair<Peak, std::size_t>> found;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const Probe& pr = refined[s];
        if (pr.run.max_target < options.record_threshold) continue;
        Peak pk;
        pk.T = pr.T;
        pk.P = std::min(pr.run.max_target, 1.0);
        pk.t_flip = pr.run.t_max;
        pk.max_excited = pr.run.max_excited;
        const RabiEstimate re = nuclear_rabi_frequency(pr.run.times, pr.run.target);
        pk.Omega_N = re.status == RabiEstimate::Status::ok ? re.Omega_N : 0.0;
        pk.fit_disagreement = re.fit_disagreement;
        found.push_back({pk, seeds[s]});
    }
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first.T < y.first.T; });
    for (const auto& [pk, seed] : found) {
        if (!curve.peaks.empty() && std::abs(pk.T - curve.peaks.back().T) < 5e-4) {
            if (pk.P > curve.peaks.back().P) curve.peaks.back() = pk;
            curve.peak_flag[seed] = 1;
            continue;
        }
        curve.peaks.push_back(pk);
        curve.peak_flag[seed] = 1;
    }
    curve.status = curve.peaks.empty() ? "no transition found in range" : "ok";
    return curve;
}

FirstPeak first_peak(const ScanCurve& curve, double fidelity_floor) {
    FirstPeak out;
    for (const Peak& pk : curve.peaks) {
        if (pk.P >= fidelity_floor) {
            out.found = true;
            out.peak = pk;
            out.message = "ok";
            return out;
        }
    }
    out.message = "no high-fidelity peak";
    return out;
}

RabiEstimate nuclear_rabi_frequency(const std::vector<double>& t, const std::vector<double>& p) {
    RabiEstimate est;
    if (t.size() != p.size() || t.size() < 3) return est;
    const double gmax = *std::max_element(p.begin(), p.end());
    if (gmax < 0.9) return est;

    const double half = 0.5 * gmax;
    std::size_t i = 0;
    while (i < p.size() && p[i] < half) ++i;
    // The lobe ends when p falls below half after getting close to the global
    // maximum; dips from the stepwise micromotion near the crossing are ignored.
    std::size_t best = i;
    for (; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
        if (p[i] < half && p[best] >= 0.9 * gmax) break;
    }
    if (!(t[best] > 0)) return est;
    est.status = RabiEstimate::Status::ok;
    est.t_pi = t[best];
    est.Omega_N = M_PI / est.t_pi;

    if (t.back() >= 3.0 * est.t_pi) {
        // least squares of p ~ b + a (1 - cos W t) / 2 over W, with (a, b) linear
        auto residual = [&](double W) {
            double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0, pp = 0;
            for (std::size_t k = 0; k < t.size(); ++k) {
                const double x = 0.5 * (1.0 - std::cos(W * t[k]));
                s11 += x * x;
                s12 += x;
                s22 += 1.0;
                r1 += x * p[k];
                r2 += p[k];
                pp += p[k] * p[k];
            }
            const double det = s11 * s22 - s12 * s12;
            if (std::abs(det) < 1e-300) return pp;
            const double a = (r1 * s22 - r2 * s12) / det, b = (s11 * r2 - s12 * r1) / det;
            return pp - a * r1 - b * r2;
        };
        double lo = 0.6 * est.Omega_N, hi = 1.4 * est.Omega_N, bestW = est.Omega_N, bestR = residual(bestW);
        const int n = 161;
        for (int k = 0; k < n; ++k) {
            const double W = lo + (hi - lo) * k / (n - 1);
            const double r = residual(W);
            if (r < bestR) bestR = r, bestW = W;
        }
        double a = bestW - (hi - lo) / (n - 1), b = bestW + (hi - lo) / (n - 1);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), d = a + g * (b - a), fc = residual(c), fd = residual(d);
        for (int it = 0; it < 60 && b - a > 1e-10 * bestW; ++it) {
            if (fc < fd) {
                b = d, d = c, fd = fc, c = b - g * (b - a), fc = residual(c);
            } else {
                a = c, c = d, fc = fd, d = a + g * (b - a), fd = residual(d);
            }
        }
        est.fit_used = true;
        est.fit_Omega = 0.5 * (a + b);
        est.fit_disagreement = std::abs(est.fit_Omega - est.Omega_N) > 0.05 * est.Omega_N;
    }
    return est;
}

RabiEstimate nuclear_rabi_frequency(const Trajectory& traj, const BasisState& target, const AtomSpec& atom) {
    return nuclear_rabi_frequency(traj.times, population(traj, target, atom).values);
}

PeakStructure peak_spacing_analysis(const ScanCurve& curve) {
    PeakStructure ps;
    if (curve.peaks.size() < 2) {
        ps.message = "insufficient data: fewer than two peaks";
        return ps;
    }
    std::vector<Peak> pk = curve.peaks;
    std::sort(pk.begin(), pk.end(), [](const Peak& a, const Peak& b) { return a.T < b.T; });
    // Order unit: the first peak or the smallest gap between orders. Gaps below
    // a third of the first period are split copies of the same order.
    double base = pk.front().T;
    for (std::size_t i = 1; i < pk.size(); ++i) {
        const double d = pk[i].T - pk[i - 1].T;
        if (d > 0.33 * pk.front().T) base = std::min(base, d);
    }
    std::map<int, Peak> by_order;
    for (const Peak& p : pk) {
        const int n = std::max(1, static_cast<int>(std::lround(p.T / base)));
        auto it = by_order.find(n);
        if (it == by_order.end() || p.P > it->second.P) by_order[n] = p;
    }
    if (by_order.size() < 2) {
        ps.message = "insufficient data: fewer than two distinct orders";
        return ps;
    }
    double num = 0, den = 0;
    for (const auto& [n, p] : by_order) {
        num += n * p.T;
        den += double(n) * n;
        ps.orders.push_back(n);
        ps.periods.push_back(p.T);
        ps.implied_dE.push_back(kTwoPi * n / p.T);
        ps.Omega_N.push_back(p.Omega_N);
    }
    ps.spacing = num / den;
    ps.dE_eff = kTwoPi / ps.spacing;
    auto spread = [](const std::vector<double>& v) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        double mean = 0;
        for (double x : v) mean += x;
        mean /= v.size();
        return (*mx - *mn) / mean;
    };
    ps.dE_spread = spread(ps.implied_dE);
    std::vector<double> diffs;
    for (std::size_t i = 1; i < ps.periods.size(); ++i)
        diffs.push_back((ps.periods[i] - ps.periods[i - 1]) / (ps.orders[i] - ps.orders[i - 1]));
    ps.spacing_spread = diffs.size() > 1 ? spread(diffs) : 0.0;
    ps.ok = true;
    ps.message = "ok";
    return ps;
}

}  // namespace oner
