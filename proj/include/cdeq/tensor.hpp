#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdeq {

// Dense row-major float64 tensor. No views, no broadcasting beyond what the
// time-channel concat needs; desk-scale sizes keep copies cheap.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (numel_of(shape) != data.size())
            throw std::invalid_argument("tensor: shape/data size mismatch");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto e : s) n *= e;
        return s.empty() ? 0 : n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

inline Tensor full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& e : t.data) e = v;
    return t;
}

inline Tensor eye(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

void check_same_shape(const Tensor& a, const Tensor& b, const std::string& op);

Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materializing the transpose; the layout every layer uses.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// c1*a + c2*b, elementwise, single pass
Tensor lincomb(double c1, const Tensor& a, double c2, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);

double l2_norm(const Tensor& t);
double linf_norm(const Tensor& t);
// ||fz - z|| / ||z||; throws on zero-norm z
double relative_residual(const Tensor& z, const Tensor& fz);

}  // namespace cdeq
