#include "cdeq/tensor.hpp"

namespace cdeq {

void check_same_shape(const Tensor& a, const Tensor& b, const std::string& op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(op + ": shape mismatch");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions disagree");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += a.at(i, l) * b.at(l, j);
            c.at(i, j) = s;
        }
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: inner dimensions disagree");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += a.at(i, l) * b.at(j, l);
            c.at(i, j) = s;
        }
    return c;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw std::invalid_argument("transpose: rank-2 only");
    Tensor t({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor c = a;
    for (std::size_t i = 0; i < c.numel(); ++i) c.data[i] += b.data[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor c = a;
    for (std::size_t i = 0; i < c.numel(); ++i) c.data[i] -= b.data[i];
    return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    Tensor c = a;
    for (std::size_t i = 0; i < c.numel(); ++i) c.data[i] *= b.data[i];
    return c;
}

Tensor scale(const Tensor& a, double s) {
    Tensor c = a;
    for (auto& v : c.data) v *= s;
    return c;
}

Tensor lincomb(double c1, const Tensor& a, double c2, const Tensor& b) {
    check_same_shape(a, b, "lincomb");
    Tensor c(a.shape);
    for (std::size_t i = 0; i < c.numel(); ++i)
        c.data[i] = c1 * a.data[i] + c2 * b.data[i];
    return c;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows())
        throw std::invalid_argument("concat_cols: row counts disagree");
    Tensor c({a.rows(), a.cols() + b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, a.cols() + j) = b.at(i, j);
    }
    return c;
}

double l2_norm(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s += v * v;
    return std::sqrt(s);
}

double linf_norm(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s = std::max(s, std::fabs(v));
    return s;
}

double relative_residual(const Tensor& z, const Tensor& fz) {
    check_same_shape(z, fz, "relative_residual");
    double nz = l2_norm(z);
    if (nz == 0.0) throw std::domain_error("relative_residual: degenerate zero-norm state");
    return l2_norm(sub(fz, z)) / nz;
}

}  // namespace cdeq
