#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oner/spin.hpp"

namespace oner {

// Internal units: angular frequency in rad/us, time in us, field in gauss.
inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kMHz = kTwoPi;          // 2pi x 1 MHz in rad/us
inline constexpr double kKHz = kTwoPi * 1e-3;   // 2pi x 1 kHz in rad/us
// CODATA 2018: muB/h = 1.399624604 MHz/G, muN/h = 0.762259328 kHz/G.
inline constexpr double kBohrMagneton = kTwoPi * 1.399624604;
inline constexpr double kNuclearMagneton = kTwoPi * 0.762259328e-3;

struct AtomSpec {
    double gJ = 1.5;
    double gI = -1.0928;
    double A = kTwoPi * -260.0;
    double Q = kTwoPi * -35.0;
    double Gamma = kTwoPi * 7.48e-3;
    double lambda0_nm = 689.0;
    SpinQuantum I{4.5};
    SpinQuantum J{1.0};
    double muB = kBohrMagneton;
    double muN = kNuclearMagneton;

    int nuclear_dim() const { return I.dimension(); }
    int dim() const { return 4 * nuclear_dim(); }
    CompositeSpace space() const { return {4, nuclear_dim()}; }
    void validate() const;
};

struct DriveParams {
    double B = 3000.0;                 // G
    double Omega0 = kMHz * 30.0;       // peak electronic Rabi frequency
    double theta = kTwoPi / 6.0;       // rad
    double Delta = 0.0;                // omega0 - omega
    double T = 0.5;                    // us
    double tau = 50.0;                 // us
    void validate() const;
};

// Electronic sublevels in basis order.
enum class Level { S0 = 0, P1_minus = 1, P1_zero = 2, P1_plus = 3 };

struct BasisState {
    Level level = Level::S0;
    double mI = 0.0;

    double mJ() const;
    bool excited() const { return level != Level::S0; }
    std::string str() const;
    bool operator==(const BasisState&) const = default;
};

int basis_index(const BasisState& s, const AtomSpec& atom = {});
BasisState basis_state(int index, const AtomSpec& atom = {});

// A one-level transition m_I <-> m_I + 1, stored as 2 m_I of the lower level.
struct Transition {
    int two_mI = -9;
    double mI() const { return 0.5 * two_mI; }
    std::string str() const;
    static Transition parse(const std::string& text, const AtomSpec& atom = {});
    static std::vector<Transition> all(const AtomSpec& atom = {});
    bool operator==(const Transition&) const = default;
    auto operator<=>(const Transition&) const = default;
};

std::string half_integer_str(int twice);

class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

OperatorMatrix static_hamiltonian(const AtomSpec& atom, double B);
OperatorMatrix atom_field_operator(double theta, const AtomSpec& atom = {});
double modulation_envelope(double t, double T, double Omega0);
OperatorMatrix rotating_frame_term(double Delta, const AtomSpec& atom = {});
OperatorMatrix excited_projector(const AtomSpec& atom = {});

// Zero-field hyperfine energy of the F multiplet of the J = 1 manifold.
double hyperfine_multiplet_energy(const AtomSpec& atom, double F);

struct LabeledLevel {
    double energy = 0.0;
    BasisState label;
    int index = 0;
    double overlap = 0.0;
};

// Eigenvalues of the block-diagonal static Hamiltonian, each labelled with its
// dominant product state; result is sorted by basis index of the label.
std::vector<LabeledLevel> label_levels(const OperatorMatrix& H_static, const AtomSpec& atom = {},
                                       double min_overlap = 0.5);

double select_detuning(const AtomSpec& atom, double B, const Transition& tr);

struct ResidualDetunings {
    double lower = 0.0;  // s(m) + Delta
    double upper = 0.0;  // s(m+1) + Delta
};
ResidualDetunings residual_detunings(const AtomSpec& atom, double B, const Transition& tr, double Delta);

// Real-valued pieces of H(t) = H0 + (Omega(t)/2) M.
struct ModelMatrices {
    Eigen::MatrixXd H0;
    Eigen::MatrixXd M;
};
ModelMatrices build_model(const AtomSpec& atom, const DriveParams& drive);

}  // namespace oner
