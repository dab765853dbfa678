#pragma once

#include <string>
#include <vector>

#include "oner/lindblad.hpp"

namespace oner {

struct FlipResult {
    double P = 0.0;            // max target population over the window
    double t_max = 0.0;        // earliest sample reaching it
    double max_excited = 0.0;  // max total 3P1 population
    double max_trace_error = 0.0;
};

// Density-matrix flip probability for m_I -> m_I + 1 starting in |1S0,0,m_I>.
FlipResult flip_probability(const AtomSpec& atom, const DriveParams& drive, const Transition& tr,
                            const EvolveOptions& options = {});

struct TGrid {
    double start = 0.2;  // us
    double stop = 1.5;
    double step = 0.002;
    std::vector<double> values() const;
    void validate() const;
};

enum class ScanMode { hybrid, exact };

struct ScanOptions {
    ScanMode mode = ScanMode::hybrid;
    double record_threshold = 0.5;   // peaks kept when P >= this
    double screen_threshold = 0.45;  // coarse maxima refined when screening P >= this
    double resolution = 1e-4;        // us, final bracket width of the refinement
    unsigned threads = 0;            // 0 = all hardware threads
    EvolveOptions evolve;
};

struct RabiEstimate {
    enum class Status { ok, no_oscillation } status = Status::no_oscillation;
    double Omega_N = 0.0;   // pi / t_pi
    double t_pi = 0.0;
    bool fit_used = false;  // sinusoid cross-check applied
    double fit_Omega = 0.0;
    bool fit_disagreement = false;
};

struct Peak {
    double T = 0.0;
    double P = 0.0;
    double t_flip = 0.0;
    double Omega_N = 0.0;
    double max_excited = 0.0;
    bool fit_disagreement = false;
};

struct ScanCurve {
    Transition transition;
    double Delta = 0.0;
    std::vector<double> periods;
    std::vector<double> probabilities;  // screening values (density matrix in exact mode)
    std::vector<char> peak_flag;        // grid point that seeded a recorded peak
    std::vector<Peak> peaks;            // ascending T
    std::string status;                 // "ok" or "no transition found in range"
    ScanMode mode = ScanMode::hybrid;
};

ScanCurve scan_modulation_period(const AtomSpec& atom, const DriveParams& drive_template, const Transition& tr,
                                 const TGrid& grid, const ScanOptions& options = {});

struct FirstPeak {
    bool found = false;
    Peak peak;
    std::string message;
};
FirstPeak first_peak(const ScanCurve& curve, double fidelity_floor = 0.99);

RabiEstimate nuclear_rabi_frequency(const std::vector<double>& times, const std::vector<double>& target_population);
RabiEstimate nuclear_rabi_frequency(const Trajectory& traj, const BasisState& target, const AtomSpec& atom = {});

struct PeakStructure {
    bool ok = false;
    std::string message;
    double spacing = 0.0;   // us, least-squares T_1
    double dE_eff = 0.0;    // 2 pi / spacing
    std::vector<int> orders;
    std::vector<double> periods;
    std::vector<double> implied_dE;  // 2 pi n / T_n
    std::vector<double> Omega_N;
    double dE_spread = 0.0;       // (max - min) / mean of implied_dE
    double spacing_spread = 0.0;  // (max - min) / mean of consecutive T differences
};
PeakStructure peak_spacing_analysis(const ScanCurve& curve);

}  // namespace oner
