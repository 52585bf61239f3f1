#include "cdeq/linalg.hpp"

#include <cmath>

namespace cdeq {

bool gauss_solve(Tensor A, Tensor b, Tensor& x) {
    const std::size_t n = A.rows();
    if (A.rank() != 2 || A.cols() != n || b.numel() != n)
        throw std::invalid_argument("gauss_solve: dimension mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(A.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(A.at(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (!(best > 1e-300)) return false;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A.at(col, j), A.at(piv, j));
            std::swap(b.data[col], b.data[piv]);
        }
        const double d = A.at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = A.at(r, col) / d;
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) A.at(r, j) -= factor * A.at(col, j);
            b.data[r] -= factor * b.data[col];
        }
    }
    x = Tensor({n});
    for (std::size_t ri = n; ri > 0; --ri) {
        std::size_t r = ri - 1;
        double s = b.data[r];
        for (std::size_t j = r + 1; j < n; ++j) s -= A.at(r, j) * x.data[j];
        x.data[r] = s / A.at(r, r);
    }
    return x.all_finite();
}

ClsResult constrained_least_squares(const Tensor& R, double ridge) {
    if (R.rank() != 2 || R.cols() < 1)
        throw std::invalid_argument("constrained_least_squares: need n x p with p >= 1");
    if (ridge < 0.0)
        throw std::invalid_argument("constrained_least_squares: ridge must be >= 0");
    const std::size_t n = R.rows(), p = R.cols();

    ClsResult out;
    if (p == 1) {
        out.alpha = full({1}, 1.0);
        out.ok = true;
        return out;
    }

    Tensor G({p, p});
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += R.at(r, i) * R.at(r, j);
            G.at(i, j) = s;
            G.at(j, i) = s;
        }
    double tr = 0.0;
    for (std::size_t i = 0; i < p; ++i) tr += G.at(i, i);
    const double eff = ridge * (tr / static_cast<double>(p));

    // KKT: [2(G + eff I)  1; 1^T  0] [alpha; nu] = [0; 1]
    Tensor K({p + 1, p + 1});
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) K.at(i, j) = 2.0 * G.at(i, j);
        K.at(i, i) += 2.0 * eff;
        K.at(i, p) = 1.0;
        K.at(p, i) = 1.0;
    }
    Tensor rhs({p + 1});
    rhs.data[p] = 1.0;

    Tensor sol;
    if (!gauss_solve(K, rhs, sol)) return out;

    out.alpha = Tensor({p});
    for (std::size_t i = 0; i < p; ++i) out.alpha.data[i] = sol.data[i];
    out.ok = out.alpha.all_finite();
    return out;
}

}  // namespace cdeq
