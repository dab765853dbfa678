#include "oner/atom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <tuple>

namespace oner {

void AtomSpec::validate() const {
    if (J.two_j() != 2) throw std::invalid_argument("atom: only J = 1 excited manifolds are supported");
    if (I.two_j() < 1) throw std::invalid_argument("atom: nuclear spin must be at least 1/2");
    for (double v : {gJ, gI, A, Q, Gamma, lambda0_nm, muB, muN})
        if (!std::isfinite(v)) throw std::invalid_argument("atom: non-finite constant");
    if (Gamma < 0) throw std::invalid_argument("atom: decay rate must be non-negative");
    if (lambda0_nm <= 0) throw std::invalid_argument("atom: wavelength must be positive");
}

void DriveParams::validate() const {
    if (!(B >= 0) || !std::isfinite(B)) throw std::invalid_argument("drive: field must be finite and >= 0");
    if (!(Omega0 >= 0) || !std::isfinite(Omega0)) throw std::invalid_argument("drive: Rabi frequency must be >= 0");
    if (!(T > 0) || !std::isfinite(T)) throw std::invalid_argument("drive: modulation period must be > 0");
    if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("drive: window must be > 0");
    if (!std::isfinite(theta) || !std::isfinite(Delta)) throw std::invalid_argument("drive: non-finite angle or detuning");
}

double BasisState::mJ() const {
    switch (level) {
        case Level::P1_minus: return -1.0;
        case Level::P1_plus: return 1.0;
        default: return 0.0;
    }
}

std::string half_integer_str(int twice) {
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return (twice < 0 ? "-" : "+") + std::to_string(std::abs(twice)) + "/2";
}

std::string BasisState::str() const {
    static const char* names[] = {"1S0,0", "3P1,-1", "3P1,0", "3P1,+1"};
    return std::string("|") + names[static_cast<int>(level)] + "," +
           half_integer_str(static_cast<int>(std::lround(2 * mI))) + ">";
}

int basis_index(const BasisState& s, const AtomSpec& atom) {
    const int nn = atom.nuclear_dim();
    const double k = atom.I.j() - s.mI;
    const long kk = std::lround(k);
    if (std::abs(k - kk) > 1e-9 || kk < 0 || kk >= nn)
        throw std::invalid_argument("basis_index: m_I out of range for this nuclear spin");
    return static_cast<int>(s.level) * nn + static_cast<int>(kk);
}

BasisState basis_state(int index, const AtomSpec& atom) {
    const int nn = atom.nuclear_dim();
    if (index < 0 || index >= atom.dim()) throw std::out_of_range("basis_state: index out of range");
    return {static_cast<Level>(index / nn), atom.I.m(index % nn)};
}

std::string Transition::str() const { return half_integer_str(two_mI) + "<->" + half_integer_str(two_mI + 2); }

namespace {

int parse_half_integer(const std::string& s) {
    static const std::regex frac(R"(^\s*([+-]?)(\d+)\s*/\s*2\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, frac)) {
        int v = std::stoi(m[2].str());
        if (v % 2 == 0) throw std::invalid_argument("not a half-odd value: " + s);
        return m[1].str() == "-" ? -v : v;
    }
    std::size_t pos = 0;
    double d = std::stod(s, &pos);
    if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument("bad spin projection: " + s);
    double twice = 2 * d;
    if (std::abs(twice - std::round(twice)) > 1e-9) throw std::invalid_argument("not a half-integer: " + s);
    return static_cast<int>(std::lround(twice));
}

}  // namespace

Transition Transition::parse(const std::string& text, const AtomSpec& atom) {
    std::string t = text;
    for (const char* sep : {"<->", "\xE2\x86\x94", "<>", ":"}) {
        auto p = t.find(sep);
        if (p != std::string::npos) {
            int lo, hi;
            try {
                lo = parse_half_integer(t.substr(0, p));
                hi = parse_half_integer(t.substr(p + std::string(sep).size()));
            } catch (const std::exception&) {
                throw std::invalid_argument("invalid transition '" + text + "'");
            }
            if (hi != lo + 2) throw std::invalid_argument("transition '" + text + "' is not a one-level transition");
            t = t.substr(0, p);
            break;
        }
    }
    int lo;
    try {
        lo = parse_half_integer(t);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid transition '" + text + "'");
    }
    if (lo < -atom.I.two_j() || lo > atom.I.two_j() - 2 || ((lo - atom.I.two_j()) % 2) != 0)
        throw std::invalid_argument("transition '" + text + "' is outside the nuclear spin manifold");
    return Transition{lo};
}

std::vector<Transition> Transition::all(const AtomSpec& atom) {
    std::vector<Transition> out;
    for (int m = -atom.I.two_j(); m <= atom.I.two_j() - 2; m += 2) out.push_back({m});
    return out;
}

OperatorMatrix excited_projector(const AtomSpec& atom) {
    const int nn = atom.nuclear_dim();
    OperatorMatrix P = OperatorMatrix::Zero(atom.dim(), atom.dim());
    for (int i = nn; i < atom.dim(); ++i) P(i, i) = 1.0;
    return P;
}

OperatorMatrix static_hamiltonian(const AtomSpec& atom, double B) {
    atom.validate();
    if (!std::isfinite(B)) throw std::invalid_argument("static_hamiltonian: field must be finite");
    const CompositeSpace sp = atom.space();
    const SpinMatrices Is = angular_momentum_matrices(atom.I);
    const SpinMatrices Js = angular_momentum_matrices(atom.J);
    const OperatorMatrix Ex = embed(excited_to_electronic(Js.Jx), Slot::electronic, sp);
    const OperatorMatrix Ey = embed(excited_to_electronic(Js.Jy), Slot::electronic, sp);
    const OperatorMatrix Ez = embed(excited_to_electronic(Js.Jz), Slot::electronic, sp);
    const OperatorMatrix Nx = embed(Is.Jx, Slot::nuclear, sp);
    const OperatorMatrix Ny = embed(Is.Jy, Slot::nuclear, sp);
    const OperatorMatrix Nz = embed(Is.Jz, Slot::nuclear, sp);
    const OperatorMatrix Pe = excited_projector(atom);

    OperatorMatrix H = atom.gJ * atom.muB * B * Ez - atom.gI * atom.muN * B * Nz;

    const OperatorMatrix IJ = Nx * Ex + Ny * Ey + Nz * Ez;
    const double I = atom.I.j(), J = atom.J.j();
    const double casimir = I * (I + 1) * J * (J + 1);
    const double denom = 2 * I * J * (2 * I - 1) * (2 * J - 1);
    H += atom.A * IJ;
    if (atom.Q != 0.0) H += atom.Q * (1.5 * IJ * (2.0 * IJ + Pe) - casimir * Pe) / denom;
    return H;
}

double hyperfine_multiplet_energy(const AtomSpec& atom, double F) {
    const double I = atom.I.j(), J = atom.J.j();
    const double K = F * (F + 1) - I * (I + 1) - J * (J + 1);
    const double q = (1.5 * K * (K + 1) - 2 * I * (I + 1) * J * (J + 1)) / (4 * I * (2 * I - 1) * J * (2 * J - 1));
    return atom.A * K / 2 + atom.Q * q;
}

OperatorMatrix atom_field_operator(double theta, const AtomSpec& atom) {
    if (!std::isfinite(theta)) throw std::invalid_argument("atom_field_operator: non-finite angle");
    OperatorMatrix E = OperatorMatrix::Zero(4, 4);
    const double s = std::sin(theta) / std::sqrt(2.0);
    E(0, static_cast<int>(Level::P1_zero)) = std::cos(theta);
    E(0, static_cast<int>(Level::P1_minus)) = s;
    E(0, static_cast<int>(Level::P1_plus)) = -s;
    E += E.adjoint().eval();
    return embed(E, Slot::electronic, atom.space());
}

double modulation_envelope(double t, double T, double Omega0) {
    if (!(T > 0)) throw std::invalid_argument("modulation_envelope: period must be positive");
    return 0.5 * Omega0 * (1.0 - std::cos(kTwoPi * t / T));
}

OperatorMatrix rotating_frame_term(double Delta, const AtomSpec& atom) { return Delta * excited_projector(atom); }

std::vector<LabeledLevel> label_levels(const OperatorMatrix& H, const AtomSpec& atom, double min_overlap) {
    const int nn = atom.nuclear_dim();
    if (H.rows() != atom.dim() || H.cols() != atom.dim())
        throw std::invalid_argument("label_levels: Hamiltonian has wrong dimension");
    if (hermiticity_error(H) > 1e-9 * std::max(1.0, max_abs(H)))
        throw std::invalid_argument("label_levels: Hamiltonian is not Hermitian");

    std::vector<LabeledLevel> out(atom.dim());
    struct Block { int start, size; const char* name; };
    for (Block blk : {Block{0, nn, "1S0"}, Block{nn, 3 * nn, "3P1"}}) {
        Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(H.block(blk.start, blk.start, blk.size, blk.size));
        const Eigen::MatrixXd ov = es.eigenvectors().cwiseAbs2();

        struct Cand { double ov; int basis, vec; };
        std::vector<Cand> cands;
        cands.reserve(blk.size * blk.size);
        for (int i = 0; i < blk.size; ++i)
            for (int k = 0; k < blk.size; ++k) cands.push_back({ov(i, k), i, k});
        // Descending overlap; ties by descending m_I, then descending m_J.
        auto key = [&](const Cand& c) {
            BasisState b = basis_state(blk.start + c.basis, atom);
            return std::make_tuple(-c.ov, -b.mI, -b.mJ(), c.vec);
        };
        std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) { return key(a) < key(b); });

        std::vector<char> used_b(blk.size, 0), used_v(blk.size, 0);
        int assigned = 0;
        double worst = 1.0;
        for (const Cand& c : cands) {
            if (used_b[c.basis] || used_v[c.vec]) continue;
            used_b[c.basis] = used_v[c.vec] = 1;
            LabeledLevel& L = out[blk.start + c.basis];
            L.energy = es.eigenvalues()(c.vec);
            L.index = blk.start + c.basis;
            L.label = basis_state(L.index, atom);
            L.overlap = c.ov;
            worst = std::min(worst, c.ov);
            if (++assigned == blk.size) break;
        }
        if (worst < min_overlap) {
            std::ostringstream os;
            os << "not in Paschen-Back regime: " << blk.name << " manifold has a level with overlap " << worst
               << " < " << min_overlap;
            throw RegimeError(os.str());
        }
    }
    return out;
}

namespace {

// s(m) = E(3P1,-1,m) - E(1S0,0,m) from labelled static eigenvalues.
std::pair<double, double> transition_energies(const AtomSpec& atom, double B, const Transition& tr) {
    if (tr.two_mI < -atom.I.two_j() || tr.two_mI > atom.I.two_j() - 2)
        throw std::invalid_argument("select_detuning: transition " + tr.str() + " is not valid");
    const auto levels = label_levels(static_hamiltonian(atom, B), atom);
    auto s = [&](double m) {
        return levels[basis_index({Level::P1_minus, m}, atom)].energy - levels[basis_index({Level::S0, m}, atom)].energy;
    };
    return {s(tr.mI()), s(tr.mI() + 1)};
}

}  // namespace

double select_detuning(const AtomSpec& atom, double B, const Transition& tr) {
    auto [s0, s1] = transition_energies(atom, B, tr);
    return -0.5 * (s0 + s1);
}

ResidualDetunings residual_detunings(const AtomSpec& atom, double B, const Transition& tr, double Delta) {
    auto [s0, s1] = transition_energies(atom, B, tr);
    return {s0 + Delta, s1 + Delta};
}

ModelMatrices build_model(const AtomSpec& atom, const DriveParams& drive) {
    drive.validate();
    ModelMatrices m;
    m.H0 = (static_hamiltonian(atom, drive.B) + rotating_frame_term(drive.Delta, atom)).real();
    m.M = atom_field_operator(drive.theta, atom).real();
    return m;
}

}  // namespace oner
