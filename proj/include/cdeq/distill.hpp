#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cdeq/consistency.hpp"
#include "cdeq/trajectory.hpp"

namespace cdeq {

struct LossConfig {
    double lambda1 = 0.8;   // global vs local mix
    double lambda2 = 0.05;  // task anchor weight
    std::string metric = "mse";  // mse | l1
    double mu = 0.99;            // EMA decay for the local-loss target
    int k_task_max = -1;         // task loss active for k <= this; <0 means K/4
    // The entry state (z_0, t = eps) is what inference starts from, but the
    // plain draw k ~ U{1..K} never trains on it. This widens the global-loss
    // draw to {0..K}; the local loss stays guarded to k >= 1.
    bool train_entry_state = false;

    void validate() const;
    json to_json() const;
};

struct DistillConfig {
    int epochs = 200;
    double lr = 1e-3;
    std::string lr_decay = "none";  // none | cosine (floor at 5% of lr)
    std::size_t batch_size = 64;
    std::uint64_t seed = 7;
    std::uint64_t init_seed = 23;
    double init_noise = 1e-3;

    void validate() const;
    json to_json() const;
};

struct DistillResult {
    StudentParams student;
    StudentParams student_ema;
    json epoch_log = json::array();
    json events;
};

// Plain (tape-free) losses; mean over every element of the group, so a batch
// mean over samples of a per-sample mean over dimensions.
double metric_mean(const Tensor& a, const Tensor& b, const std::string& metric);
double loss_global(const StudentParams& sp, const Tensor& z_k, double t, const Tensor& x,
                   const Tensor& z_K, const std::string& metric);
double loss_local(const StudentParams& sp, const StudentParams& ema, const Tensor& z_k, double t,
                  const Tensor& z_prev, double t_prev, const Tensor& x, const std::string& metric);
double loss_task(const StudentParams& sp, const ReadoutHead& head, const Tensor& z_k, double t,
                 const Tensor& x, const std::vector<int>& y);

// Trajectory-indexed forms; k must lie in [1, K].
double loss_global(const StudentParams& sp, const TrajectorySet& ts, std::size_t i, int k,
                   const std::string& metric);
double loss_local(const StudentParams& sp, const StudentParams& ema, const TrajectorySet& ts,
                  std::size_t i, int k, const std::string& metric);
double loss_task(const StudentParams& sp, const ReadoutHead& head, const TrajectorySet& ts,
                 std::size_t i, int k, int y);

// Consistency distillation over a cached trajectory set. The teacher supplies
// the frozen task head and the student trunk's starting point; X_val/y_val
// feed the per-epoch single-evaluation validation accuracy.
DistillResult distill(const TrajectorySet& ts, const std::vector<int>& y_train,
                      const Teacher& teacher, const Tensor& X_val, const std::vector<int>& y_val,
                      const LossConfig& loss_cfg, const DistillConfig& cfg);

}  // namespace cdeq
