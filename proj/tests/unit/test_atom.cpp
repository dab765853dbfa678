#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oner/config.hpp"

using namespace oner;

namespace {

// Closed-form zero-field energy of a hyperfine multiplet (independent of the library).
double multiplet(double A, double Q, double I, double J, double F) {
    const double K = F * (F + 1) - I * (I + 1) - J * (J + 1);
    return 0.5 * A * K + Q * (1.5 * K * (K + 1) - 2 * I * (I + 1) * J * (J + 1)) / (4 * I * (2 * I - 1) * J * (2 * J - 1));
}

std::vector<double> block_eigenvalues(const OperatorMatrix& H, int start, int size) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.block(start, start, size, size));
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + size);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("zero-field hyperfine multiplets follow the closed form") {
    const AtomSpec atom;
    const OperatorMatrix H = static_hamiltonian(atom, 0.0);
    CHECK(hermiticity_error(H) < 1e-12);
    const auto ground = block_eigenvalues(H, 0, 10);
    for (double e : ground) CHECK(std::abs(e) < 1e-10);

    std::vector<double> expected;
    for (double F : {3.5, 4.5, 5.5})
        for (int k = 0; k < 2 * F + 1; ++k) expected.push_back(multiplet(atom.A, atom.Q, 4.5, 1.0, F));
    std::sort(expected.begin(), expected.end());
    const auto excited = block_eigenvalues(H, 10, 30);
    REQUIRE(excited.size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(std::abs(excited[k] - expected[k]) <= 1e-10 * std::abs(expected[k]));
    for (double F : {3.5, 4.5, 5.5})
        CHECK(hyperfine_multiplet_energy(atom, F) == doctest::Approx(multiplet(atom.A, atom.Q, 4.5, 1.0, F)).epsilon(1e-13));
}

TEST_CASE("without hyperfine coupling the Hamiltonian is the diagonal Zeeman term") {
    AtomSpec atom;
    atom.A = 0.0;
    atom.Q = 0.0;
    const double B = 1234.0;
    const OperatorMatrix H = static_hamiltonian(atom, B);
    for (int i = 0; i < atom.dim(); ++i) {
        const BasisState s = basis_state(i, atom);
        const double e = atom.gJ * atom.muB * B * s.mJ() - atom.gI * atom.muN * B * s.mI;
        CHECK(H(i, i).real() == doctest::Approx(e).epsilon(1e-13));
    }
    CHECK(max_abs(H - OperatorMatrix(H.diagonal().asDiagonal())) < 1e-12);
    // midpoint detuning reduces to the electronic Zeeman shift of 3P1, m_J = -1
    for (const auto& tr : Transition::all(atom))
        CHECK(select_detuning(atom, B, tr) == doctest::Approx(atom.gJ * atom.muB * B).epsilon(1e-12));
}

TEST_CASE("basis indices round-trip and follow the documented order") {
    const AtomSpec atom;
    for (int i = 0; i < atom.dim(); ++i) CHECK(basis_index(basis_state(i, atom), atom) == i);
    CHECK(basis_index({Level::S0, 4.5}) == 0);
    CHECK(basis_index({Level::S0, -4.5}) == 9);
    CHECK(basis_index({Level::P1_minus, 4.5}) == 10);
    CHECK(basis_index({Level::P1_zero, 4.5}) == 20);
    CHECK(basis_index({Level::P1_plus, -4.5}) == 39);
    CHECK_THROWS_AS(basis_index({Level::S0, 5.5}), std::invalid_argument);
    CHECK_THROWS_AS(basis_index({Level::S0, 0.0}), std::invalid_argument);
}

TEST_CASE("transitions parse in several spellings and reject invalid pairs") {
    CHECK(Transition::parse("-9/2<->-7/2").two_mI == -9);
    CHECK(Transition::parse("-9/2\xE2\x86\x94-7/2").two_mI == -9);
    CHECK(Transition::parse("-4.5:-3.5").two_mI == -9);
    CHECK(Transition::parse("+7/2<>+9/2").two_mI == 7);
    CHECK(Transition::parse("-1/2:1/2").two_mI == -1);
    CHECK_THROWS_AS(Transition::parse("-9/2:-5/2"), std::invalid_argument);
    CHECK_THROWS_AS(Transition::parse("+9/2:+11/2"), std::invalid_argument);
    CHECK_THROWS_AS(Transition::parse("nonsense"), std::invalid_argument);
    const auto all = Transition::all();
    REQUIRE(all.size() == 9);
    CHECK(all.front().str() == "-9/2<->-7/2");
    CHECK(all.back().str() == "+7/2<->+9/2");
}

TEST_CASE("atom-field operator couples each m_I to the three excited sublevels") {
    const AtomSpec atom;
    const double theta = 1.0;
    const OperatorMatrix M = atom_field_operator(theta, atom);
    CHECK(hermiticity_error(M) < 1e-15);
    int nonzero = 0;
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) nonzero += std::abs(M(i, j)) > 0;
    CHECK(nonzero == 2 * 3 * 10);
    for (int k = 0; k < 10; ++k) {
        const double m = 4.5 - k;
        const int g = basis_index({Level::S0, m});
        CHECK(M(g, basis_index({Level::P1_zero, m})).real() == doctest::Approx(std::cos(theta)));
        CHECK(M(g, basis_index({Level::P1_minus, m})).real() == doctest::Approx(std::sin(theta) / std::sqrt(2.0)));
        CHECK(M(g, basis_index({Level::P1_plus, m})).real() == doctest::Approx(-std::sin(theta) / std::sqrt(2.0)));
    }
    CHECK(modulation_envelope(0.0, 0.5, 2.0) == doctest::Approx(0.0));
    CHECK(modulation_envelope(0.25, 0.5, 2.0) == doctest::Approx(2.0));
    CHECK(modulation_envelope(0.125, 0.5, 2.0) == doctest::Approx(1.0));
    CHECK(rotating_frame_term(2.0, atom).trace().real() == doctest::Approx(60.0));
}

TEST_CASE("midpoint rule gives equal and opposite residual detunings") {
    const AtomSpec atom;
    for (const auto& p : presets()) {
        for (const auto& tr : Transition::all(atom)) {
            CAPTURE(p.name);
            CAPTURE(tr.str());
            const double Delta = select_detuning(atom, p.field, tr);
            const ResidualDetunings r = residual_detunings(atom, p.field, tr, Delta);
            const double scale = std::max(std::abs(r.lower), std::abs(r.upper));
            CHECK(std::abs(r.lower + r.upper) <= 1e-10 * scale);
            CHECK(scale > 0.0);
        }
    }
}

TEST_CASE("level labelling requires the Paschen-Back regime") {
    const AtomSpec atom;
    CHECK_NOTHROW(label_levels(static_hamiltonian(atom, 3000.0), atom));
    CHECK_THROWS_AS(label_levels(static_hamiltonian(atom, 0.5), atom), RegimeError);
    const auto lv = label_levels(static_hamiltonian(atom, 3000.0), atom);
    REQUIRE(lv.size() == 40);
    for (std::size_t i = 0; i < lv.size(); ++i) {
        CHECK(basis_index(lv[i].label, atom) == static_cast<int>(i));
        CHECK(lv[i].overlap >= 0.5);
    }
}

TEST_CASE("model matrices are real symmetric and include the rotating frame") {
    const AtomSpec atom;
    DriveParams d;
    d.Delta = 3.0;
    const ModelMatrices m = build_model(atom, d);
    CHECK((m.H0 - m.H0.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((m.M - m.M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const OperatorMatrix ref = static_hamiltonian(atom, d.B) + rotating_frame_term(d.Delta, atom);
    CHECK((m.H0 - ref.real()).cwiseAbs().maxCoeff() < 1e-9);
    DriveParams bad = d;
    bad.T = -1.0;
    CHECK_THROWS_AS(build_model(atom, bad), std::invalid_argument);
}
