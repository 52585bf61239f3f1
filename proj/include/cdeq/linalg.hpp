#pragma once
#include "cdeq/tensor.hpp"

namespace cdeq {

// Solves A x = b in place of copies, Gaussian elimination with partial
// pivoting. Returns false if a pivot collapses (singular to working precision).
bool gauss_solve(Tensor A, Tensor b, Tensor& x);

struct ClsResult {
    Tensor alpha;   // [p]
    bool ok = false;
};

// min ||R alpha||^2 (+ ridge regularization on the normal-system diagonal)
// s.t. 1^T alpha = 1, via the KKT system of the Lagrangian normal equations.
// R is [n x p] with residual columns. The ridge is scaled by trace(G)/p so a
// single default works across residual magnitudes; ridge=0 keeps the system
// exact for the analytic small cases.
ClsResult constrained_least_squares(const Tensor& R, double ridge);

}  // namespace cdeq
