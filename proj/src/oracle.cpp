#include "oner/oracle.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>

namespace oner {

namespace {

SuperOperator sparse_of(const OperatorMatrix& m) { return m.sparseView(0.0, 0.0); }

double one_norm(const SuperOperator& A) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(A.cols());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SuperOperator::InnerIterator it(A, k); it; ++it) col(it.col()) += std::abs(it.value());
    return col.size() ? col.maxCoeff() : 0.0;
}

}  // namespace

SuperOperator lindblad_superoperator(const OperatorMatrix& H, const CollapseSet& collapses) {
    const int d = static_cast<int>(H.rows());
    collapses.validate(d);
    SuperOperator Id(d, d);
    Id.setIdentity();
    const cplx I(0, 1);
    const SuperOperator Hs = sparse_of(H);
    const SuperOperator HsT = sparse_of(H.transpose());
    SuperOperator L = (-I) * (SuperOperator(Eigen::kroneckerProduct(Id, Hs)) - SuperOperator(Eigen::kroneckerProduct(HsT, Id)));
    for (std::size_t k = 0; k < collapses.operators.size(); ++k) {
        const OperatorMatrix& c = collapses.operators[k];
        const OperatorMatrix cdc = c.adjoint() * c;
        const double g = collapses.rates[k];
        SuperOperator jump = Eigen::kroneckerProduct(sparse_of(c.conjugate()), sparse_of(c));
        SuperOperator left = Eigen::kroneckerProduct(Id, sparse_of(cdc));
        SuperOperator right = Eigen::kroneckerProduct(sparse_of(cdc.transpose()), Id);
        L += g * (jump - 0.5 * left - 0.5 * right);
    }
    L.makeCompressed();
    return L;
}

Eigen::VectorXcd expmv(const SuperOperator& A, double s, const Eigen::VectorXcd& v) {
    const double nrm = one_norm(A) * std::abs(s);
    const int steps = std::max(1, static_cast<int>(std::ceil(nrm / 0.5)));
    const double h = s / steps;
    Eigen::VectorXcd x = v, term(v.size());
    for (int k = 0; k < steps; ++k) {
        Eigen::VectorXcd acc = x;
        term = x;
        for (int n = 1; n < 60; ++n) {
            term = (h / n) * (A * term);
            acc += term;
            if (term.lpNorm<Eigen::Infinity>() <= 1e-17 * acc.lpNorm<Eigen::Infinity>()) break;
        }
        x.swap(acc);
    }
    return x;
}

DensityMatrix propagator_oracle(const std::vector<OperatorMatrix>& H_sequence, const CollapseSet& collapses,
                                const DensityMatrix& rho0, double dt) {
    const int d = static_cast<int>(rho0.rows());
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    for (const auto& H : H_sequence) {
        if (H.rows() != d) throw std::invalid_argument("propagator_oracle: Hamiltonian dimension mismatch");
        v = expmv(lindblad_superoperator(H, collapses), dt, v);
    }
    return Eigen::Map<const DensityMatrix>(v.data(), d, d);
}

std::vector<OperatorMatrix> midpoint_hamiltonians(const AtomSpec& atom, const DriveParams& drive, double t0, double t1,
                                                  int n) {
    if (n <= 0 || !(t1 > t0)) throw std::invalid_argument("midpoint_hamiltonians: bad slicing");
    const OperatorMatrix H0 = static_hamiltonian(atom, drive.B) + rotating_frame_term(drive.Delta, atom);
    const OperatorMatrix M = atom_field_operator(drive.theta, atom);
    const double dt = (t1 - t0) / n;
    std::vector<OperatorMatrix> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = t0 + (k + 0.5) * dt;
        out.push_back(H0 + (0.5 * modulation_envelope(t, drive.T, drive.Omega0)) * M);
    }
    return out;
}

}  // namespace oner
