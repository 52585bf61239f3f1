#pragma once
#include <cstdint>
#include <string>

#include "cdeq/autograd.hpp"
#include "cdeq/rng.hpp"
#include "cdeq/serialize.hpp"
#include "cdeq/tensor.hpp"

namespace cdeq {

// f_theta(z, x) = act(V z + U x + b), weight-tied across the implicit depth.
struct BackboneParams {
    Tensor V;  // [d_z x d_z]
    Tensor U;  // [d_z x d_x]
    Tensor b;  // [d_z]
    std::string activation = "tanh";  // tanh | relu | identity

    std::size_t d_z() const { return V.rows(); }
    std::size_t d_x() const { return U.cols(); }
};

struct ReadoutHead {
    Tensor H;  // [d_y x d_z]
    Tensor c;  // [d_y]
};

// z, x rank-1 [d] or rank-2 [B x d]; output matches z's rank.
Tensor f_forward(const BackboneParams& p, const Tensor& z, const Tensor& x);
Tensor residual_F(const BackboneParams& p, const Tensor& z, const Tensor& x);

Tensor head_logits(const ReadoutHead& h, const Tensor& z);

// Power-iteration estimate of the top singular value; rescales V in place to
// sigma_max when it exceeds it.
double spectral_rescale(Tensor& V, double sigma_max, int iters = 20);

struct TeacherTrainConfig {
    std::size_t d_z = 16;
    double sigma_max = 0.9;
    bool rescale_spectral = true;
    int epochs = 60;
    double lr = 5e-3;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
    int solve_K_max = 30;
    double solve_tol = 1e-6;
};

struct Teacher {
    BackboneParams backbone;
    ReadoutHead head;
    json metrics;
};

struct Dataset;       // harness
struct SolverConfig;  // solver

// Jacobian-free training: solve z* with the fixed-point solver, then take the
// gradient of one f application at the frozen z*.
Teacher train_teacher(const Dataset& data, const SolverConfig& solver_cfg,
                      const TeacherTrainConfig& cfg);

double teacher_accuracy(const Teacher& t, const SolverConfig& solver_cfg, int K_eval,
                        const Tensor& X, const std::vector<int>& y);

void save_teacher(const std::string& path, const Teacher& t, const json& extra);
Teacher load_teacher(const std::string& path, json* manifest_out = nullptr);

}  // namespace cdeq
