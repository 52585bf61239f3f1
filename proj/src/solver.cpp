#include "cdeq/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cdeq {

void SolverConfig::validate() const {
    if (m < 1) throw std::invalid_argument("solver: m must be >= 1");
    if (!(beta_aa > 0.0) || beta_aa > 1.0)
        throw std::invalid_argument("solver: beta_aa must be in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
    if (K_max < 0) throw std::invalid_argument("solver: K_max must be >= 0");
    if (ridge < 0.0) throw std::invalid_argument("solver: ridge must be >= 0");
}

Tensor picard_step(const MapFn& f, const Tensor& z, const Tensor& x, double beta_aa) {
    return lincomb(beta_aa, f(z, x), 1.0 - beta_aa, z);
}

std::pair<Tensor, Tensor> anderson_step(const std::vector<Tensor>& zs,
                                        const std::vector<Tensor>& fs,
                                        const SolverConfig& cfg, bool* ls_ok) {
    if (zs.empty() || zs.size() != fs.size())
        throw std::invalid_argument("anderson_step: history lengths disagree");
    const std::size_t p = zs.size();
    const std::size_t n = zs[0].numel();

    Tensor R({n, p});
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t r = 0; r < n; ++r)
            R.at(r, i) = fs[i].data[r] - zs[i].data[r];

    ClsResult cls = constrained_least_squares(R, cfg.ridge);
    if (!cls.ok) {
        if (ls_ok) *ls_ok = false;
        Tensor alpha({p});
        alpha.data[p - 1] = 1.0;
        return {lincomb(cfg.beta_aa, fs.back(), 1.0 - cfg.beta_aa, zs.back()), alpha};
    }
    if (ls_ok) *ls_ok = true;

    Tensor zf(zs[0].shape), zz(zs[0].shape);
    for (std::size_t i = 0; i < p; ++i) {
        const double a = cls.alpha.data[i];
        for (std::size_t r = 0; r < n; ++r) {
            zf.data[r] += a * fs[i].data[r];
            zz.data[r] += a * zs[i].data[r];
        }
    }
    return {lincomb(cfg.beta_aa, zf, 1.0 - cfg.beta_aa, zz), cls.alpha};
}

static bool rel_converged(const Tensor& z, double res_abs, double tol) {
    const double nz = l2_norm(z);
    if (nz < 1e-12) return res_abs < tol;
    return res_abs / nz < tol;
}

static SolveTrace run_loop(const MapFn& f, const Tensor& x, const Tensor& z0,
                           const SolverConfig& cfg, SolveMethod method, int steps,
                           bool honor_tol) {
    SolveTrace tr;
    tr.states.push_back(z0);
    std::vector<Tensor> fvals;
    fvals.push_back(f(z0, x));
    if (!fvals.back().all_finite()) {
        tr.aborted_nonfinite = true;
        return tr;
    }
    tr.residual_norms.push_back(l2_norm(sub(fvals.back(), z0)));
    if (honor_tol && rel_converged(z0, tr.residual_norms.back(), cfg.tol)) {
        tr.converged = true;
        return tr;
    }

    for (int k = 0; k < steps; ++k) {
        Tensor z_next;
        if (method == SolveMethod::picard) {
            z_next = lincomb(cfg.beta_aa, fvals.back(), 1.0 - cfg.beta_aa, tr.states.back());
        } else {
            const std::size_t window = std::min<std::size_t>(k, cfg.m) + 1;
            const std::size_t lo = tr.states.size() - window;
            std::vector<Tensor> wz(tr.states.begin() + lo, tr.states.end());
            std::vector<Tensor> wf(fvals.begin() + lo, fvals.end());
            bool ok = true;
            auto [zn, alpha] = anderson_step(wz, wf, cfg, &ok);
            if (!ok) tr.ls_fallbacks++;
            z_next = std::move(zn);
        }
        if (!z_next.all_finite()) {
            tr.aborted_nonfinite = true;
            return tr;
        }
        Tensor fz = f(z_next, x);
        if (!fz.all_finite()) {
            tr.aborted_nonfinite = true;
            tr.states.push_back(std::move(z_next));
            return tr;
        }
        const double res = l2_norm(sub(fz, z_next));
        tr.states.push_back(std::move(z_next));
        fvals.push_back(std::move(fz));
        tr.residual_norms.push_back(res);
        tr.iterations_used = k + 1;
        if (honor_tol && rel_converged(tr.states.back(), res, cfg.tol)) {
            tr.converged = true;
            return tr;
        }
    }
    return tr;
}

SolveTrace solve(const MapFn& f, const Tensor& x, const Tensor& z0, const SolverConfig& cfg,
                 SolveMethod method) {
    cfg.validate();
    return run_loop(f, x, z0, cfg, method, cfg.K_max, true);
}

SolveTrace solve_exact_steps(const MapFn& f, const Tensor& x, const Tensor& z0,
                             const SolverConfig& cfg, int K, SolveMethod method) {
    cfg.validate();
    return run_loop(f, x, z0, cfg, method, K, false);
}

static Tensor row_of(const Tensor& X, std::size_t i) {
    Tensor r({X.cols()});
    for (std::size_t j = 0; j < X.cols(); ++j) r.at(j) = X.at(i, j);
    return r;
}

std::vector<SolveTrace> solve_rows(const MapFn& f, const Tensor& X, const Tensor& z0,
                                   const SolverConfig& cfg, SolveMethod method) {
    cfg.validate();
    std::vector<SolveTrace> out;
    out.reserve(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        out.push_back(run_loop(f, row_of(X, i), z0, cfg, method, cfg.K_max, true));
    return out;
}

std::vector<SolveTrace> solve_rows_exact(const MapFn& f, const Tensor& X, const Tensor& z0,
                                         const SolverConfig& cfg, int K, SolveMethod method) {
    cfg.validate();
    std::vector<SolveTrace> out;
    out.reserve(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        out.push_back(run_loop(f, row_of(X, i), z0, cfg, method, K, false));
    return out;
}

}  // namespace cdeq
