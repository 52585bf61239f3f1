#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cdeq/backbone.hpp"
#include "cdeq/serialize.hpp"
#include "cdeq/solver.hpp"
#include "cdeq/tensor.hpp"

namespace cdeq {

// Solver progress mapped onto a bounded pseudo-time axis:
// t_k = eps + (1 - exp(-rho k)) (T - eps). k=0 sits at eps, large k saturates
// toward T without reaching it.
struct TimeMap {
    double eps = 0.0;
    double T = 1.0;
    double rho = 0.25;
    int K = 20;

    double time_of(int k) const;
    std::vector<double> grid() const;  // t_0 .. t_K
    void validate() const;
    json to_json() const;
    static TimeMap from_json(const json& j);
};

// Endpoint augmentation applied when the cache is written: positions
// k in [k_min, K - k_tail] are replaced by z_K with probability p_aug.
// k = 0 and the trailing k_tail positions are never replaced.
struct AugmentConfig {
    double p_aug = 0.1;
    int k_min = 1;
    int k_tail = 2;

    bool eligible(int k, int K) const { return k >= k_min && k <= K - k_tail; }
    void validate(int K) const;
    json to_json() const;
    static AugmentConfig from_json(const json& j);
};

struct TrajectorySet {
    Tensor X;                    // [N x d_x]
    std::vector<Tensor> states;  // N tensors of [(K+1) x d_z], post-augmentation
    std::vector<std::vector<std::uint8_t>> aug_mask;  // 1 where a row was replaced by z_K
    TimeMap tmap;
    json meta;

    std::size_t n() const { return states.size(); }
    std::size_t d_z() const { return states.empty() ? 0 : states[0].cols(); }
    int K() const { return tmap.K; }

    Tensor state_row(std::size_t i, int k) const;  // z_k of trajectory i, rank-1
    Tensor x_row(std::size_t i) const;
};

// Exactly K accelerated steps per row of X; each trajectory depends on its
// own input only. z0_policy: "zeros" (default) or "normal" (per-row standard
// normal start). Augmentation draws happen in (row, k) order over eligible
// positions, so the replaced fraction is Bernoulli(p_aug).
TrajectorySet sample_trajectories(const Teacher& teacher, const Tensor& X,
                                  const SolverConfig& solver_cfg, const TimeMap& tmap,
                                  const AugmentConfig& aug, std::uint64_t seed,
                                  const std::string& z0_policy = "zeros",
                                  json meta = json::object());

void write_cache(const std::string& path, const TrajectorySet& ts);
TrajectorySet read_cache(const std::string& path);

}  // namespace cdeq
