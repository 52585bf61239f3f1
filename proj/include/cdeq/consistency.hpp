#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cdeq/backbone.hpp"
#include "cdeq/serialize.hpp"
#include "cdeq/solver.hpp"
#include "cdeq/tensor.hpp"

namespace cdeq {

// c_skip(t) = ((t - eps)/(T - eps))^gamma, c_out = 1 - c_skip. The pair sums
// to 1.0 exactly in IEEE double rounding, which the boundary identities rely
// on: at t = eps the map is pure prediction, at t = T it is the identity.
struct BoundaryCoeffs {
    double eps = 0.0;
    double T = 1.0;
    double gamma = 1.0;

    double c_skip(double t) const;
    double c_out(double t) const { return 1.0 - c_skip(t); }
    void validate() const;
    json to_json() const;
    static BoundaryCoeffs from_json(const json& j);
};

// Student g(z, t, x) = c_skip(t) z + c_out(t) h(z, t, x) with
// h = W [f_trunk(z, x) | t ... t] : the trunk is a copy of the teacher's
// layer, the mixing matrix starts at [I | 0] so h begins as f itself.
struct StudentParams {
    BackboneParams trunk;
    Tensor W;  // [d_z x (d_z + d_t)]
    std::size_t d_t = 4;
    BoundaryCoeffs bc;

    std::size_t d_z() const { return trunk.d_z(); }
    std::size_t d_x() const { return trunk.d_x(); }
};

StudentParams init_student(const Teacher& teacher, std::size_t d_t, const BoundaryCoeffs& bc,
                           std::uint64_t seed = 23, double init_noise = 1e-3);

// z, x rank-1 or rank-2 (same rank); t is shared across rows.
Tensor h_phi(const StudentParams& sp, const Tensor& z, double t, const Tensor& x);

// First inference step: no history, the prediction is h itself.
Tensor p_phi_one_step(const StudentParams& sp, const Tensor& z_t, double t, const Tensor& x);

// The student's structural prior: its own predictions stand in for f values
// inside the solver's mixing step. Same routine, same arithmetic, so outputs
// are bit-identical to the solver given the same window (oldest first).
std::pair<Tensor, Tensor> p_phi_aa(const std::vector<Tensor>& zs, const std::vector<Tensor>& hs,
                                   const SolverConfig& cfg, bool* ls_ok = nullptr);

// Self-contained form: evaluates h at both states, mixes per sample. On a
// least-squares breakdown the row falls back to the one-step prediction.
Tensor p_phi_aa(const StudentParams& sp, const Tensor& z_t, const Tensor& z_prev, double t,
                double t_prev, const Tensor& x, const SolverConfig& cfg, bool* ls_ok = nullptr);

// Convex blend of the state and the prediction; t must lie in [eps, T].
Tensor g_phi(const BoundaryCoeffs& bc, const Tensor& P_value, const Tensor& z_t, double t);
// Pointwise training form: P is the single-state prediction h(z, t, x).
Tensor g_phi(const StudentParams& sp, const Tensor& z, double t, const Tensor& x);

struct InferenceSchedule {
    int J = 2;                // number of network evaluations
    double beta_sched = 0.5;  // geometric approach toward T

    double time_of(int j, const BoundaryCoeffs& bc) const;
    void validate() const;
};

struct InferenceResult {
    Tensor z_final;              // [B x d_z]
    std::vector<Tensor> states;  // z_0 .. z_J
    std::vector<double> times;   // pseudo-time label per state
    int nfe = 0;
    int ls_fallbacks = 0;
};

// Few-step inference: j = 0 evaluates h once and takes the pure prediction;
// each later step evaluates h once at the current state and mixes the two
// newest (state, prediction) pairs per sample with the solver's own step.
// Exactly J evaluations of h, whatever J is.
InferenceResult infer(const StudentParams& sp, const Tensor& X, const InferenceSchedule& sched,
                      const SolverConfig& solver_cfg);

void ema_update(StudentParams& ema, const StudentParams& p, double mu);

void save_student(const std::string& path, const StudentParams& sp, const json& extra);
StudentParams load_student(const std::string& path, json* manifest_out = nullptr);

}  // namespace cdeq
