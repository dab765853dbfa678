#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oner/atom.hpp"

namespace oner {

using DensityMatrix = Eigen::MatrixXcd;

struct CollapseSet {
    std::vector<OperatorMatrix> operators;
    std::vector<double> rates;

    // c_alpha = |1S0,0><3P1,alpha| (x) 1 for alpha = 0, +1, -1, all at rate Gamma.
    static CollapseSet spontaneous_emission(const AtomSpec& atom);
    void validate(int dim) const;
};

// -i[H, rho] + sum_a k_a (c rho c^+ - {c^+ c, rho}/2)
OperatorMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& H, const CollapseSet& collapses);

DensityMatrix pure_density(int index, int dim);

struct DensityCheck {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    bool ok(double trace_tol = 1e-8, double herm_tol = 1e-10, double pos_tol = 1e-8) const {
        return trace_error <= trace_tol && hermiticity_error <= herm_tol && min_eigenvalue >= -pos_tol;
    }
};
DensityCheck check_density(const DensityMatrix& rho);

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

enum class Method { magnus4, adaptive_rk45 };
std::string to_string(Method m);

struct EvolveOptions {
    Method method = Method::magnus4;
    int min_slices_per_period = 512;  // magnus4 only
    int slices_per_sample = 4;        // fine slices merged into one density-matrix step
    double max_slice = 0.0;           // optional cap on the slice length (us), 0 = none
    double rtol = 1e-9;               // adaptive_rk45 only
    double atol = 1e-11;
    double min_step = 1e-10;
    long max_steps = 50'000'000;
    bool jumps = true;  // false: no-jump (conditional) dynamics
};

struct SamplingSpec {
    int min_points = 2000;
    int min_per_period = 50;
    int checkpoints = 11;      // full density matrices kept at evenly spaced samples
    std::vector<int> tracked;  // basis indices whose populations are stored; empty = all
};

struct Checkpoint {
    double t = 0.0;
    DensityMatrix rho;
};

struct TrajectoryStats {
    Method method = Method::magnus4;
    int slices_per_period = 0;
    long steps = 0;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;  // over checkpoints
    long jump_weight_fallbacks = 0;
};

struct Trajectory {
    DriveParams params;
    std::vector<double> times;
    std::vector<int> tracked;
    Eigen::MatrixXd populations;  // rows: samples, cols: tracked
    std::vector<double> excited;  // total 3P1 population per sample
    std::vector<double> trace;
    std::vector<Checkpoint> checkpoints;
    DensityMatrix final_state;
    TrajectoryStats stats;

    int column_of(int basis_index) const;
};

Trajectory evolve(const AtomSpec& atom, const DriveParams& drive, const DensityMatrix& rho0,
                  const SamplingSpec& sampling = {}, const EvolveOptions& options = {});

struct PopulationSeries {
    std::vector<double> values;  // clamped to [0, 1]
    double clamp_magnitude = 0.0;
};
PopulationSeries population(const Trajectory& traj, const BasisState& state, const AtomSpec& atom = {});

struct SliceLayout {
    int fine = 0;    // propagator slices per period
    int stride = 1;  // fine slices per sample / density-matrix step
    int samples() const { return fine / stride; }
};
SliceLayout slice_layout(const DriveParams& drive, const SamplingSpec& sampling, const EvolveOptions& options);

// Reduced result of a run that only tracks one target level.
struct TargetRun {
    double max_target = 0.0;
    double t_max = 0.0;
    double max_excited = 0.0;
    double max_trace_error = 0.0;
    std::vector<double> times;
    std::vector<double> target;
    bool stopped_early = false;  // target reached stop_above before tau
};

// Density-matrix run from |1S0,0,m_init> recording one target population.
// The run ends as soon as the target population reaches stop_above.
TargetRun evolve_target(const AtomSpec& atom, const DriveParams& drive, int init_index, int target_index,
                        const EvolveOptions& options = {}, bool keep_series = false,
                        double stop_above = std::numeric_limits<double>::infinity());

// No-jump pure-state run with H - i Gamma/2 P_e; a lower bound on the
// density-matrix target population that costs a matrix-vector product per slice.
TargetRun evolve_pure(const AtomSpec& atom, const DriveParams& drive, int init_index, int target_index,
                      const EvolveOptions& options = {}, bool keep_series = false);

}  // namespace oner
