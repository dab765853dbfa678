#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace oner {

using cplx = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;

// Spin magnitude stored as 2j so half-integers are exact.
class SpinQuantum {
public:
    explicit SpinQuantum(double j);
    static SpinQuantum from_twice(int two_j);

    double j() const { return 0.5 * two_j_; }
    int two_j() const { return two_j_; }
    int dimension() const { return two_j_ + 1; }
    // m value of row k in descending order (k = 0 is m = +j).
    double m(int k) const { return j() - k; }

private:
    int two_j_ = 0;
};

struct SpinMatrices {
    OperatorMatrix Jx, Jy, Jz;
};

// Standard spin-j representation, rows ordered by descending m.
SpinMatrices angular_momentum_matrices(double j);
SpinMatrices angular_momentum_matrices(const SpinQuantum& s);

enum class Slot { electronic, nuclear };

// Product space (electronic ⊗ nuclear); basis index = e * nuclear_dim + k.
struct CompositeSpace {
    int electronic_dim = 4;
    int nuclear_dim = 10;
    int dim() const { return electronic_dim * nuclear_dim; }
};

OperatorMatrix embed(const OperatorMatrix& op, Slot slot, const CompositeSpace& space = {});

// Place a 3x3 J = 1 operator (rows m = +1, 0, -1) into the 4-level electronic
// space ordered (S0,0), (P1,-1), (P1,0), (P1,+1).
OperatorMatrix excited_to_electronic(const OperatorMatrix& j1_op);

double max_abs(const OperatorMatrix& m);
double hermiticity_error(const OperatorMatrix& m);

}  // namespace oner
