#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "oner/lindblad.hpp"

namespace oner {

using SuperOperator = Eigen::SparseMatrix<cplx>;

// Column-stacked Lindbladian: vec(drho/dt) = L vec(rho).
SuperOperator lindblad_superoperator(const OperatorMatrix& H, const CollapseSet& collapses);

// exp(s A) v by scaled Taylor series.
Eigen::VectorXcd expmv(const SuperOperator& A, double s, const Eigen::VectorXcd& v);

// Exact exponential of the Lindbladian for each piecewise-constant slice.
DensityMatrix propagator_oracle(const std::vector<OperatorMatrix>& H_sequence, const CollapseSet& collapses,
                                const DensityMatrix& rho0, double dt);

// Midpoint Hamiltonians of H(t) on [t0, t1] split into n equal slices.
std::vector<OperatorMatrix> midpoint_hamiltonians(const AtomSpec& atom, const DriveParams& drive, double t0, double t1,
                                                  int n);

}  // namespace oner
