#include "cdeq/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cdeq/rng.hpp"

namespace cdeq {

Tensor Dataset::gather_X(const std::vector<std::size_t>& idx) const {
    Tensor out({idx.size(), X.cols()});
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) out.at(i, j) = X.at(idx[i], j);
    return out;
}

std::vector<int> Dataset::gather_y(const std::vector<std::size_t>& idx) const {
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
    return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

void finish(Dataset& ds, Rng& rng, std::size_t N) {
    // Shuffle rows, then split 80/20 in shuffled order.
    std::vector<std::size_t> perm = rng.permutation(N);
    Tensor Xs({N, ds.X.cols()});
    std::vector<int> ys(ds.y.empty() ? 0 : N);
    Tensor yr;
    const bool has_reg = ds.y_reg.numel() > 0;
    if (has_reg) yr = Tensor({N, ds.y_reg.cols()});
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < ds.X.cols(); ++j) Xs.at(i, j) = ds.X.at(perm[i], j);
        if (!ds.y.empty()) ys[i] = ds.y[perm[i]];
        if (has_reg)
            for (std::size_t j = 0; j < ds.y_reg.cols(); ++j) yr.at(i, j) = ds.y_reg.at(perm[i], j);
    }
    ds.X = std::move(Xs);
    ds.y = std::move(ys);
    if (has_reg) ds.y_reg = std::move(yr);
    const std::size_t n_train = (N * 8) / 10;
    ds.train_idx.clear();
    ds.val_idx.clear();
    for (std::size_t i = 0; i < N; ++i)
        (i < n_train ? ds.train_idx : ds.val_idx).push_back(i);
}

Dataset two_moons(std::size_t N, double noise, std::uint64_t seed) {
    Dataset ds;
    ds.name = "two_moons";
    ds.X = Tensor({N, 2});
    ds.y.resize(N);
    Rng rng(seed);
    const std::size_t n0 = N / 2;
    for (std::size_t i = 0; i < N; ++i) {
        const double th = rng.uniform(0.0, kPi);
        if (i < n0) {
            ds.X.at(i, 0) = std::cos(th);
            ds.X.at(i, 1) = std::sin(th);
            ds.y[i] = 0;
        } else {
            ds.X.at(i, 0) = 1.0 - std::cos(th);
            ds.X.at(i, 1) = 0.5 - std::sin(th);
            ds.y[i] = 1;
        }
    }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < 2; ++j) ds.X.at(i, j) += noise * rng.normal();
    finish(ds, rng, N);
    return ds;
}

Dataset spirals(std::size_t N, double noise, std::uint64_t seed) {
    Dataset ds;
    ds.name = "spirals";
    ds.X = Tensor({N, 2});
    ds.y.resize(N);
    Rng rng(seed);
    const std::size_t n0 = N / 2;
    for (std::size_t i = 0; i < N; ++i) {
        const double u = rng.uniform();
        const double th = u * 3.0 * kPi;
        const double r = 0.2 + 0.8 * u;
        const int cls = (i < n0) ? 0 : 1;
        const double phase = cls == 0 ? 0.0 : kPi;
        ds.X.at(i, 0) = r * std::cos(th + phase);
        ds.X.at(i, 1) = r * std::sin(th + phase);
        ds.y[i] = cls;
    }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < 2; ++j) ds.X.at(i, j) += noise * rng.normal();
    finish(ds, rng, N);
    return ds;
}

Dataset affine_regression(std::size_t N, double noise, std::uint64_t seed) {
    Dataset ds;
    ds.name = "affine_regression";
    ds.X = Tensor({N, 2});
    ds.y_reg = Tensor({N, 1});
    Rng rng(seed);
    const double w0 = rng.normal(), w1 = rng.normal(), b = rng.normal();
    for (std::size_t i = 0; i < N; ++i) {
        ds.X.at(i, 0) = rng.normal();
        ds.X.at(i, 1) = rng.normal();
        ds.y_reg.at(i, 0) = w0 * ds.X.at(i, 0) + w1 * ds.X.at(i, 1) + b + noise * rng.normal();
    }
    finish(ds, rng, N);
    return ds;
}

}  // namespace

Dataset make_dataset(const std::string& name, std::size_t N, double noise, std::uint64_t seed) {
    if (N < 10) throw std::invalid_argument("make_dataset: N must be at least 10");
    if (noise < 0.0) throw std::invalid_argument("make_dataset: negative noise");
    Dataset ds;
    if (name == "two_moons") ds = two_moons(N, noise, seed);
    else if (name == "spirals") ds = spirals(N, noise, seed);
    else if (name == "affine_regression") ds = affine_regression(N, noise, seed);
    else throw std::invalid_argument("make_dataset: unknown dataset '" + name + "'");
    ds.seed = seed;
    ds.noise = noise;
    return ds;
}

}  // namespace cdeq
