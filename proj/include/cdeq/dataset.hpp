#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cdeq/tensor.hpp"

namespace cdeq {

struct Dataset {
    std::string name;
    Tensor X;                  // [N x d_x]
    std::vector<int> y;        // class labels (classification sets)
    Tensor y_reg;              // [N x d_y] (affine_regression only)
    std::vector<std::size_t> train_idx, val_idx;
    std::uint64_t seed = 0;
    double noise = 0.0;

    std::size_t n() const { return X.rows(); }
    std::size_t d_x() const { return X.cols(); }

    Tensor gather_X(const std::vector<std::size_t>& idx) const;
    std::vector<int> gather_y(const std::vector<std::size_t>& idx) const;
};

// two_moons | spirals | affine_regression; deterministic in (N, noise, seed).
// Split is a seeded permutation, 80/20.
Dataset make_dataset(const std::string& name, std::size_t N, double noise, std::uint64_t seed);

}  // namespace cdeq
