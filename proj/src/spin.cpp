#include "oner/spin.hpp"

#include <cmath>
#include <string>

namespace oner {

SpinQuantum::SpinQuantum(double j) {
    if (!std::isfinite(j) || j < 0.0)
        throw std::invalid_argument("spin magnitude must be non-negative, got " + std::to_string(j));
    double twice = 2.0 * j;
    double r = std::round(twice);
    if (std::abs(twice - r) > 1e-12)
        throw std::invalid_argument("spin magnitude must be a half-integer, got " + std::to_string(j));
    two_j_ = static_cast<int>(r);
}

SpinQuantum SpinQuantum::from_twice(int two_j) {
    if (two_j < 0) throw std::invalid_argument("2j must be non-negative");
    return SpinQuantum(0.5 * two_j);
}

SpinMatrices angular_momentum_matrices(const SpinQuantum& s) {
    const int d = s.dimension();
    const double j = s.j();
    OperatorMatrix Jp = OperatorMatrix::Zero(d, d);
    OperatorMatrix Jz = OperatorMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        Jz(k, k) = s.m(k);
        if (k > 0) {
            // <m+1| J+ |m> with m = s.m(k)
            double m = s.m(k);
            Jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
        }
    }
    OperatorMatrix Jm = Jp.adjoint();
    SpinMatrices out;
    out.Jx = 0.5 * (Jp + Jm);
    out.Jy = cplx(0.0, -0.5) * (Jp - Jm);
    out.Jz = Jz;
    return out;
}

SpinMatrices angular_momentum_matrices(double j) { return angular_momentum_matrices(SpinQuantum(j)); }

OperatorMatrix embed(const OperatorMatrix& op, Slot slot, const CompositeSpace& space) {
    const int ne = space.electronic_dim, nn = space.nuclear_dim;
    const int expect = slot == Slot::electronic ? ne : nn;
    if (op.rows() != expect || op.cols() != expect)
        throw std::invalid_argument("embed: operator is " + std::to_string(op.rows()) + "x" +
                                    std::to_string(op.cols()) + ", slot needs " + std::to_string(expect));
    OperatorMatrix out = OperatorMatrix::Zero(space.dim(), space.dim());
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b)
            for (int k = 0; k < nn; ++k)
                for (int l = 0; l < nn; ++l) {
                    cplx v = slot == Slot::electronic ? (k == l ? op(a, b) : cplx(0))
                                                      : (a == b ? op(k, l) : cplx(0));
                    if (v != cplx(0)) out(a * nn + k, b * nn + l) = v;
                }
    return out;
}

OperatorMatrix excited_to_electronic(const OperatorMatrix& j1_op) {
    if (j1_op.rows() != 3 || j1_op.cols() != 3)
        throw std::invalid_argument("excited_to_electronic: expected a 3x3 operator");
    // electronic index 1 -> m=-1 (row 2), 2 -> m=0 (row 1), 3 -> m=+1 (row 0)
    const int row_of[4] = {-1, 2, 1, 0};
    OperatorMatrix out = OperatorMatrix::Zero(4, 4);
    for (int a = 1; a < 4; ++a)
        for (int b = 1; b < 4; ++b) out(a, b) = j1_op(row_of[a], row_of[b]);
    return out;
}

double max_abs(const OperatorMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_error(const OperatorMatrix& m) { return max_abs(m - m.adjoint()); }

}  // namespace oner
