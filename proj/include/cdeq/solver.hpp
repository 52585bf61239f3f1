#pragma once
#include <functional>
#include <vector>

#include "cdeq/linalg.hpp"
#include "cdeq/tensor.hpp"

namespace cdeq {

struct SolverConfig {
    int m = 5;              // history window depth
    double beta_aa = 1.0;   // relaxation, (0, 1]
    int K_max = 100;
    double tol = 1e-6;      // relative-residual tolerance
    double ridge = 1e-8;

    void validate() const;
};

struct SolveTrace {
    std::vector<Tensor> states;          // z_0 .. z_k
    std::vector<double> residual_norms;  // ||f(z_k, x) - z_k||
    bool converged = false;
    int iterations_used = 0;
    int ls_fallbacks = 0;  // least-squares failures that fell back to Picard
    bool aborted_nonfinite = false;
};

enum class SolveMethod { picard, anderson };

using MapFn = std::function<Tensor(const Tensor& z, const Tensor& x)>;

Tensor picard_step(const MapFn& f, const Tensor& z, const Tensor& x, double beta_aa);

// One AA update from the given history (oldest first). zs and fs must be the
// already-sliced window, length min(k, m) + 1. Returns the next state and the
// mixing weights; on least-squares failure falls back to a damped step from
// the newest state and reports ls_ok = false.
std::pair<Tensor, Tensor> anderson_step(const std::vector<Tensor>& zs,
                                        const std::vector<Tensor>& fs,
                                        const SolverConfig& cfg, bool* ls_ok = nullptr);

// Iterates until relative residual < tol or K_max; convergence is checked at
// z_0 first (a start at the fixed point converges with 0 iterations). When
// ||z|| < 1e-12 the absolute residual breaks the tie.
SolveTrace solve(const MapFn& f, const Tensor& x, const Tensor& z0, const SolverConfig& cfg,
                 SolveMethod method);

// Runs exactly K steps regardless of tolerance (trajectory sampling and
// fixed-budget baselines).
SolveTrace solve_exact_steps(const MapFn& f, const Tensor& x, const Tensor& z0,
                             const SolverConfig& cfg, int K,
                             SolveMethod method = SolveMethod::anderson);

// One independent solve per row of X, so each trajectory is a function of its
// own input only. f sees rank-1 states; z0 [d_z] seeds every row.
std::vector<SolveTrace> solve_rows(const MapFn& f, const Tensor& X, const Tensor& z0,
                                   const SolverConfig& cfg, SolveMethod method);
std::vector<SolveTrace> solve_rows_exact(const MapFn& f, const Tensor& X, const Tensor& z0,
                                         const SolverConfig& cfg, int K,
                                         SolveMethod method = SolveMethod::anderson);

}  // namespace cdeq
