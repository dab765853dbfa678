#include "oner/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oner {

CollapseSet CollapseSet::spontaneous_emission(const AtomSpec& atom) {
    CollapseSet c;
    for (Level l : {Level::P1_zero, Level::P1_plus, Level::P1_minus}) {
        OperatorMatrix e = OperatorMatrix::Zero(4, 4);
        e(0, static_cast<int>(l)) = 1.0;
        c.operators.push_back(embed(e, Slot::electronic, atom.space()));
        c.rates.push_back(atom.Gamma);
    }
    return c;
}

void CollapseSet::validate(int dim) const {
    if (operators.size() != rates.size()) throw std::invalid_argument("collapse set: operator/rate count mismatch");
    for (std::size_t k = 0; k < operators.size(); ++k) {
        if (operators[k].rows() != dim || operators[k].cols() != dim)
            throw std::invalid_argument("collapse set: operator dimension mismatch");
        if (!(rates[k] >= 0)) throw std::invalid_argument("collapse set: negative rate");
    }
}

OperatorMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& H, const CollapseSet& collapses) {
    const cplx I(0, 1);
    OperatorMatrix d = -I * (H * rho - rho * H);
    for (std::size_t k = 0; k < collapses.operators.size(); ++k) {
        const OperatorMatrix& c = collapses.operators[k];
        const OperatorMatrix cdc = c.adjoint() * c;
        d += collapses.rates[k] * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return d;
}

DensityMatrix pure_density(int index, int dim) {
    if (index < 0 || index >= dim) throw std::out_of_range("pure_density: index out of range");
    DensityMatrix r = DensityMatrix::Zero(dim, dim);
    r(index, index) = 1.0;
    return r;
}

DensityCheck check_density(const DensityMatrix& rho) {
    DensityCheck c;
    c.trace_error = std::abs(rho.trace() - cplx(1.0));
    c.hermiticity_error = hermiticity_error(rho);
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

std::string to_string(Method m) { return m == Method::magnus4 ? "magnus4" : "adaptive_rk45"; }

int Trajectory::column_of(int basis_index) const {
    for (std::size_t k = 0; k < tracked.size(); ++k)
        if (tracked[k] == basis_index) return static_cast<int>(k);
    return -1;
}

SliceLayout slice_layout(const DriveParams& drive, const SamplingSpec& sampling, const EvolveOptions& options) {
    const int stride = std::max(1, options.slices_per_sample);
    long fine = std::max<long>(options.min_slices_per_period, 2);
    if (options.max_slice > 0) fine = std::max<long>(fine, static_cast<long>(std::ceil(drive.T / options.max_slice - 1e-9)));
    long macro = (fine + stride - 1) / stride;
    macro = std::max<long>(macro, sampling.min_per_period);
    macro = std::max<long>(macro, static_cast<long>(std::ceil(sampling.min_points * drive.T / drive.tau - 1e-9)));
    if (macro % 2) ++macro;
    if (macro * stride > 10'000'000) throw std::invalid_argument("slice count per period is unreasonably large");
    return {static_cast<int>(macro * stride), stride};
}

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kC1 = 0.5 - kSqrt3 / 6.0, kC2 = 0.5 + kSqrt3 / 6.0;
const double kA1 = (3.0 - 2.0 * kSqrt3) / 12.0, kA2 = (3.0 + 2.0 * kSqrt3) / 12.0;

// exp(-i s A) for real symmetric A
Eigen::MatrixXcd expm_herm(const Eigen::MatrixXd& A, double s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXcd ph(A.rows());
    for (int k = 0; k < A.rows(); ++k) ph(k) = std::polar(1.0, -s * es.eigenvalues()(k));
    Eigen::MatrixXcd VP = V.cast<cplx>() * ph.asDiagonal();
    return VP * V.transpose().cast<cplx>();
}

struct Propagators {
    int N = 0;
    double dt = 0.0;
    std::vector<Eigen::MatrixXcd> K;  // slice j maps t_j -> t_j + dt
};

// exp(-i s (H0 + c M)) as a function of the scalar c on [lo, hi], by
// Chebyshev interpolation in c (the map is entire and slowly varying).
class ChebyshevExp {
public:
    ChebyshevExp(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& M, double s, double lo, double hi)
        : H0_(H0), M_(M), s_(s), lo_(lo), hi_(hi) {
        if (hi_ - lo_ <= 1e-12 * std::max(1.0, std::abs(hi_))) {
            coef_.push_back(2.0 * direct(0.5 * (lo_ + hi_)));
            return;
        }
        for (int n = 12; n <= 96; n *= 2) {
            fit(n);
            double err = 0.0;
            for (double x : {-0.987, -0.31, 0.42, 0.993}) err = std::max(err, max_abs(eval(map(x)) - direct(map(x))));
            if (err < 1e-12) return;
        }
        throw std::runtime_error("Chebyshev interpolation of the slice exponential did not converge");
    }

    Eigen::MatrixXcd direct(double c) const { return expm_herm(H0_ + c * M_, s_); }

    Eigen::MatrixXcd eval(double c) const {
        const int n = static_cast<int>(coef_.size());
        if (n == 1) return 0.5 * coef_[0];
        const double x = (2.0 * c - lo_ - hi_) / (hi_ - lo_);
        Eigen::MatrixXcd b1 = Eigen::MatrixXcd::Zero(H0_.rows(), H0_.cols()), b2 = b1, b0;
        for (int k = n - 1; k >= 1; --k) {
            b0 = coef_[k] + (2.0 * x) * b1 - b2;
            b2.swap(b1);
            b1.swap(b0);
        }
        return 0.5 * coef_[0] + x * b1 - b2;
    }

private:
    double map(double x) const { return 0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * x; }

    void fit(int n) {
        std::vector<Eigen::MatrixXcd> vals(n);
        for (int j = 0; j < n; ++j) vals[j] = direct(map(std::cos(M_PI * (j + 0.5) / n)));
        coef_.assign(n, Eigen::MatrixXcd::Zero(H0_.rows(), H0_.cols()));
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) coef_[k] += std::cos(M_PI * k * (j + 0.5) / n) * vals[j];
            coef_[k] *= 2.0 / n;
        }
    }

    Eigen::MatrixXd H0_, M_;
    double s_, lo_, hi_;
    std::vector<Eigen::MatrixXcd> coef_;
};

class MagnusStepper {
public:
    MagnusStepper(const AtomSpec& atom, const DriveParams& drive)
        : model_(build_model(atom, drive)), drive_(drive), nn_(atom.nuclear_dim()), gamma_(atom.Gamma) {}

    double coupling(double t) const { return 0.5 * modulation_envelope(t, drive_.T, drive_.Omega0); }

    // Both CFM4 exponentials of the slice [t0, t0 + h].
    std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> halves(double t0, double h, const ChebyshevExp* cheb = nullptr) const {
        const double f1 = coupling(t0 + kC1 * h), f2 = coupling(t0 + kC2 * h);
        const double c1 = 2.0 * (kA2 * f1 + kA1 * f2), c2 = 2.0 * (kA1 * f1 + kA2 * f2);
        if (cheb) return {cheb->eval(c1), cheb->eval(c2)};
        return {expm_herm(model_.H0 + c1 * model_.M, 0.5 * h), expm_herm(model_.H0 + c2 * model_.M, 0.5 * h)};
    }

    // Symmetric split of the anti-Hermitian decay -Gamma/2 P_e around the unitary part.
    void apply_decay(Eigen::MatrixXcd& K, double h) const {
        if (gamma_ == 0.0) return;
        const double d = std::exp(-0.25 * gamma_ * h);
        const int n = static_cast<int>(K.rows());
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) K(i, j) *= (i >= nn_ ? d : 1.0) * (j >= nn_ ? d : 1.0);
    }

    Eigen::MatrixXcd slice(double t0, double h) const {
        auto [E1, E2] = halves(t0, h);
        Eigen::MatrixXcd K = E2 * E1;
        apply_decay(K, h);
        return K;
    }

    // Propagators of one period at layout.fine slices, merged in groups of
    // layout.stride.
    Propagators period(const SliceLayout& layout) const {
        const int N = layout.fine;
        const double h = drive_.T / N;
        std::vector<Eigen::MatrixXcd> fine(N);
        // coefficients 2(a f1 + b f2) stay within [2 a1 fmax, 2 a2 fmax]
        const double fmax = 0.5 * drive_.Omega0;
        const ChebyshevExp cheb(model_.H0, model_.M, 0.5 * h, 2.0 * kA1 * fmax, 2.0 * kA2 * fmax);
        // The envelope is symmetric about T/2, so slice N-1-j uses the same
        // exponentials in swapped order.
        for (int j = 0; j < N / 2; ++j) {
            auto [E1, E2] = halves(j * h, h, &cheb);
            fine[j] = E2 * E1;
            fine[N - 1 - j] = E1 * E2;
            apply_decay(fine[j], h);
            apply_decay(fine[N - 1 - j], h);
        }
        Propagators p;
        p.N = layout.samples();
        p.dt = drive_.T / p.N;
        p.K.resize(p.N);
        for (int m = 0; m < p.N; ++m) {
            p.K[m] = fine[m * layout.stride];
            for (int q = 1; q < layout.stride; ++q) p.K[m] = fine[m * layout.stride + q] * p.K[m];
        }
        return p;
    }

private:
    ModelMatrices model_;
    DriveParams drive_;
    int nn_;
    double gamma_;
};

// Slice schedule over [0, tau]: full slices of length dt plus an optional partial one.
struct Schedule {
    long full = 0;
    double tail = 0.0;
    long steps() const { return full + (tail > 0 ? 1 : 0); }
};

Schedule make_schedule(double tau, double dt) {
    Schedule s;
    double n = tau / dt;
    s.full = static_cast<long>(std::floor(n + 1e-9));
    double rem = tau - s.full * dt;
    if (rem > 1e-9 * dt) s.tail = rem;
    return s;
}

double excited_trace(const DensityMatrix& rho, int nn) {
    double s = 0;
    for (int i = nn; i < rho.rows(); ++i) s += rho(i, i).real();
    return s;
}

// Ground block += w * Gamma * (sum of the three excited diagonal blocks).
void add_jumps(DensityMatrix& rho, const DensityMatrix& src, int nn, double w_gamma) {
    rho.topLeftCorner(nn, nn) += w_gamma * (src.block(nn, nn, nn, nn) + src.block(2 * nn, 2 * nn, nn, nn) +
                                            src.block(3 * nn, 3 * nn, nn, nn));
}

// Density-matrix time stepping with the jump channel split symmetrically
// around the no-jump propagator. on_sample(step, t, rho) is called at t = 0 and
// after every slice; returning false ends the run.
template <class OnSample>
void run_density(const AtomSpec& atom, const DriveParams& drive, const EvolveOptions& opt, const SliceLayout& layout,
                 DensityMatrix& rho, TrajectoryStats& stats, OnSample&& on_sample) {
    const MagnusStepper stepper(atom, drive);
    const Propagators P = stepper.period(layout);
    const int N = P.N;
    const Schedule sched = make_schedule(drive.tau, P.dt);
    const int nn = atom.nuclear_dim();
    const double G = opt.jumps ? atom.Gamma : 0.0;

    Eigen::MatrixXcd tail;
    if (sched.tail > 0) tail = stepper.slice(sched.full * P.dt, sched.tail);

    DensityMatrix X(rho.rows(), rho.cols()), Y(rho.rows(), rho.cols());
    if (!on_sample(0L, 0.0, rho)) return;
    for (long k = 0; k < sched.steps(); ++k) {
        const bool is_tail = k >= sched.full;
        const Eigen::MatrixXcd& K = is_tail ? tail : P.K[k % N];
        const double h = is_tail ? sched.tail : P.dt;
        const double tr0 = rho.trace().real();
        if (G > 0) add_jumps(rho, rho, nn, 0.5 * h * G);
        X.noalias() = K * rho;
        Y.noalias() = X * K.adjoint();
        if (G > 0) {
            const double pe = excited_trace(Y, nn);
            const double jflux = G * pe;
            double w = 0.5 * h;
            if (jflux > 1e-14) {
                const double wc = (tr0 - Y.trace().real()) / jflux;
                if (wc >= 0.0 && wc <= h)
                    w = wc;
                else
                    ++stats.jump_weight_fallbacks;
            }
            add_jumps(Y, Y, nn, w * G);
        }
        rho.swap(Y);
        const double t = is_tail ? drive.tau : (k + 1) * P.dt;
        stats.steps = k + 1;
        if (!on_sample(k + 1, t, rho)) return;
    }
}

std::vector<long> checkpoint_rows(long samples, int count) {
    std::vector<long> rows;
    if (count <= 0 || samples <= 0) return rows;
    if (count == 1 || samples == 1) return {samples - 1};
    for (int i = 0; i < count; ++i) {
        long r = static_cast<long>(std::llround(double(i) * (samples - 1) / (count - 1)));
        if (rows.empty() || rows.back() != r) rows.push_back(r);
    }
    return rows;
}

void validate_initial(const DensityMatrix& rho0, int dim) {
    if (rho0.rows() != dim || rho0.cols() != dim) throw std::invalid_argument("evolve: initial state has wrong dimension");
    DensityCheck c = check_density(rho0);
    if (!c.ok()) {
        std::ostringstream os;
        os << "evolve: initial state is not a valid density matrix (trace error " << c.trace_error
           << ", hermiticity " << c.hermiticity_error << ", min eigenvalue " << c.min_eigenvalue << ")";
        throw std::invalid_argument(os.str());
    }
}

// Dormand-Prince 5(4) on the matrix-valued master equation.
template <class OnSample>
void run_rk45(const AtomSpec& atom, const DriveParams& drive, const EvolveOptions& opt,
              const std::vector<double>& sample_times, DensityMatrix& rho, TrajectoryStats& stats,
              OnSample&& on_sample) {
    const OperatorMatrix Hs = static_hamiltonian(atom, drive.B) + rotating_frame_term(drive.Delta, atom);
    const OperatorMatrix M = atom_field_operator(drive.theta, atom);
    const CollapseSet cs = CollapseSet::spontaneous_emission(atom);
    const cplx I(0, 1);
    const OperatorMatrix Pe = excited_projector(atom);
    auto rhs = [&](double t, const DensityMatrix& r) -> DensityMatrix {
        OperatorMatrix H = Hs + (0.5 * modulation_envelope(t, drive.T, drive.Omega0)) * M;
        if (opt.jumps) return lindblad_rhs(r, H, cs);
        // no-jump dynamics: anti-commutator part only, as a non-Hermitian H
        OperatorMatrix Heff = H - I * (0.5 * atom.Gamma) * Pe;
        return -I * (Heff * r - r * Heff.adjoint());
    };

    static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
    static const double a[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double e[7] = {35.0 / 384 - 5179.0 / 57600, 0, 500.0 / 1113 - 7571.0 / 16695,
                                125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
                                11.0 / 84 - 187.0 / 2100, -1.0 / 40};

    double t = 0.0;
    double h = std::min(1e-4, drive.T / 100);
    std::vector<DensityMatrix> k(7);
    if (!on_sample(0L, 0.0, rho)) return;
    long steps = 0;
    k[0] = rhs(t, rho);
    for (std::size_t si = 1; si < sample_times.size(); ++si) {
        const double t_end = sample_times[si];
        while (t < t_end - 1e-15) {
            if (++steps > opt.max_steps) throw IntegrationError("adaptive integrator exceeded max steps", t);
            const bool clipped = t + h > t_end;
            const double hs = clipped ? t_end - t : h;
            for (int s = 1; s < 7; ++s) {
                DensityMatrix y = rho;
                for (int q = 0; q < s; ++q)
                    if (a[s][q] != 0.0) y += (hs * a[s][q]) * k[q];
                k[s] = rhs(t + c[s] * hs, y);
            }
            DensityMatrix y5 = rho;
            for (int q = 0; q < 6; ++q)
                if (a[6][q] != 0.0) y5 += (hs * a[6][q]) * k[q];
            DensityMatrix err = DensityMatrix::Zero(rho.rows(), rho.cols());
            for (int q = 0; q < 7; ++q)
                if (e[q] != 0.0) err += (hs * e[q]) * k[q];
            double en = 0.0;
            for (int i = 0; i < rho.size(); ++i) {
                double sc = opt.atol + opt.rtol * std::max(std::abs(rho(i)), std::abs(y5(i)));
                en = std::max(en, std::abs(err(i)) / sc);
            }
            if (!std::isfinite(en)) throw IntegrationError("adaptive integrator produced non-finite values", t);
            if (en <= 1.0) {
                t += hs;
                rho = std::move(y5);
                k[0] = k[6];
                if (!clipped) h = hs * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
            } else {
                h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
                if (h < opt.min_step) {
                    std::ostringstream os;
                    os << "step size underflow at t = " << t << " us (h = " << h << ")";
                    throw IntegrationError(os.str(), t);
                }
            }
        }
        t = t_end;
        stats.steps = steps;
        if (!on_sample(static_cast<long>(si), t_end, rho)) return;
    }
}

}  // namespace

Trajectory evolve(const AtomSpec& atom, const DriveParams& drive, const DensityMatrix& rho0,
                  const SamplingSpec& sampling, const EvolveOptions& options) {
    atom.validate();
    drive.validate();
    const int dim = atom.dim();
    const int nn = atom.nuclear_dim();
    validate_initial(rho0, dim);

    Trajectory tr;
    tr.params = drive;
    tr.tracked = sampling.tracked;
    if (tr.tracked.empty())
        for (int i = 0; i < dim; ++i) tr.tracked.push_back(i);
    for (int i : tr.tracked)
        if (i < 0 || i >= dim) throw std::invalid_argument("evolve: tracked index out of range");

    const SliceLayout layout = slice_layout(drive, sampling, options);
    const double dt = drive.T / layout.samples();
    const Schedule sched = make_schedule(drive.tau, dt);
    const long samples = sched.steps() + 1;
    tr.stats.method = options.method;
    tr.stats.slices_per_period = layout.fine;
    tr.times.resize(samples);
    tr.populations.resize(samples, static_cast<long>(tr.tracked.size()));
    tr.excited.resize(samples);
    tr.trace.resize(samples);
    const auto cps = checkpoint_rows(samples, sampling.checkpoints);
    std::size_t next_cp = 0;

    auto on_sample = [&](long row, double t, const DensityMatrix& rho) {
        tr.times[row] = t;
        for (std::size_t c = 0; c < tr.tracked.size(); ++c) tr.populations(row, c) = rho(tr.tracked[c], tr.tracked[c]).real();
        tr.excited[row] = excited_trace(rho, nn);
        const cplx trc = rho.trace();
        tr.trace[row] = trc.real();
        tr.stats.max_trace_error = std::max(tr.stats.max_trace_error, std::abs(trc - cplx(1.0)));
        tr.stats.max_hermiticity_error = std::max(tr.stats.max_hermiticity_error, hermiticity_error(rho));
        if (next_cp < cps.size() && cps[next_cp] == row) {
            tr.checkpoints.push_back({t, rho});
            ++next_cp;
        }
        return true;
    };

    DensityMatrix rho = rho0;
    if (options.method == Method::magnus4) {
        run_density(atom, drive, options, layout, rho, tr.stats, on_sample);
    } else {
        std::vector<double> grid(samples);
        for (long k = 0; k < samples; ++k) grid[k] = k <= sched.full ? k * dt : drive.tau;
        run_rk45(atom, drive, options, grid, rho, tr.stats, on_sample);
    }
    tr.final_state = rho;
    tr.stats.min_eigenvalue = 1.0;
    for (const auto& cp : tr.checkpoints) tr.stats.min_eigenvalue = std::min(tr.stats.min_eigenvalue, check_density(cp.rho).min_eigenvalue);
    return tr;
}

PopulationSeries population(const Trajectory& traj, const BasisState& state, const AtomSpec& atom) {
    const int col = traj.column_of(basis_index(state, atom));
    if (col < 0) throw std::invalid_argument("population: state " + state.str() + " was not tracked");
    PopulationSeries s;
    s.values.resize(traj.populations.rows());
    for (long r = 0; r < traj.populations.rows(); ++r) {
        double v = traj.populations(r, col);
        double c = std::clamp(v, 0.0, 1.0);
        s.clamp_magnitude = std::max(s.clamp_magnitude, std::abs(v - c));
        s.values[r] = c;
    }
    return s;
}

TargetRun evolve_target(const AtomSpec& atom, const DriveParams& drive, int init_index, int target_index,
                        const EvolveOptions& options, bool keep_series, double stop_above) {
    atom.validate();
    drive.validate();
    const int nn = atom.nuclear_dim();
    TargetRun out;
    TrajectoryStats stats;
    DensityMatrix rho = pure_density(init_index, atom.dim());
    auto on_sample = [&](long, double t, const DensityMatrix& r) {
        const double p = r(target_index, target_index).real();
        if (p > out.max_target) {
            out.max_target = p;
            out.t_max = t;
        }
        out.max_excited = std::max(out.max_excited, excited_trace(r, nn));
        out.max_trace_error = std::max(out.max_trace_error, std::abs(r.trace() - cplx(1.0)));
        if (keep_series) {
            out.times.push_back(t);
            out.target.push_back(p);
        }
        if (p >= stop_above) out.stopped_early = true;
        return !out.stopped_early;
    };
    const SliceLayout layout = slice_layout(drive, {}, options);
    if (options.method == Method::magnus4) {
        run_density(atom, drive, options, layout, rho, stats, on_sample);
    } else {
        const double dt = drive.T / layout.samples();
        const Schedule sched = make_schedule(drive.tau, dt);
        std::vector<double> grid(sched.steps() + 1);
        for (long k = 0; k < static_cast<long>(grid.size()); ++k) grid[k] = k <= sched.full ? k * dt : drive.tau;
        run_rk45(atom, drive, options, grid, rho, stats, on_sample);
    }
    return out;
}

TargetRun evolve_pure(const AtomSpec& atom, const DriveParams& drive, int init_index, int target_index,
                      const EvolveOptions& options, bool keep_series) {
    atom.validate();
    drive.validate();
    const int nn = atom.nuclear_dim();
    const MagnusStepper stepper(atom, drive);
    const Propagators P = stepper.period(slice_layout(drive, {}, options));
    const int N = P.N;
    const Schedule sched = make_schedule(drive.tau, P.dt);
    Eigen::MatrixXcd tail;
    if (sched.tail > 0) tail = stepper.slice(sched.full * P.dt, sched.tail);

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(atom.dim()), nxt(atom.dim());
    psi(init_index) = 1.0;
    TargetRun out;
    auto record = [&](double t) {
        const double p = std::norm(psi(target_index));
        if (p > out.max_target) {
            out.max_target = p;
            out.t_max = t;
        }
        out.max_excited = std::max(out.max_excited, psi.tail(atom.dim() - nn).squaredNorm());
        if (keep_series) {
            out.times.push_back(t);
            out.target.push_back(p);
        }
    };
    record(0.0);
    for (long k = 0; k < sched.steps(); ++k) {
        const bool is_tail = k >= sched.full;
        nxt.noalias() = (is_tail ? tail : P.K[k % N]) * psi;
        psi.swap(nxt);
        record(is_tail ? drive.tau : (k + 1) * P.dt);
    }
    out.max_trace_error = std::abs(1.0 - psi.squaredNorm());
    return out;
}

}  // namespace oner
