#include "cdeq/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdeq/dataset.hpp"
#include "cdeq/errors.hpp"
#include "cdeq/solver.hpp"

namespace cdeq {

namespace {

Tensor as_row(const Tensor& v) {
    if (v.rank() == 2) return v;
    if (v.rank() != 1) throw std::invalid_argument("backbone: rank-1 or rank-2 input expected");
    Tensor r({1, v.numel()}, v.data);
    return r;
}

Tensor match_rank(Tensor m, const Tensor& like) {
    if (like.rank() == 1) m.shape = {m.numel()};
    return m;
}

Tensor add_bias_rows(Tensor m, const Tensor& b) {
    if (b.numel() != m.cols()) throw std::invalid_argument("backbone: bias width mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m.at(i, j) += b.at(j);
    return m;
}

void apply_activation(Tensor& t, const std::string& act) {
    if (act == "tanh") {
        for (auto& v : t.data) v = std::tanh(v);
    } else if (act == "relu") {
        for (auto& v : t.data) v = v > 0.0 ? v : 0.0;
    } else if (act != "identity") {
        throw std::invalid_argument("backbone: unknown activation '" + act + "'");
    }
}

}  // namespace

Tensor f_forward(const BackboneParams& p, const Tensor& z, const Tensor& x) {
    Tensor zr = as_row(z), xr = as_row(x);
    if (zr.cols() != p.d_z()) throw std::invalid_argument("f_forward: z width != d_z");
    if (xr.cols() != p.d_x()) throw std::invalid_argument("f_forward: x width != d_x");
    if (zr.rows() != xr.rows()) throw std::invalid_argument("f_forward: batch mismatch");
    Tensor pre = add_bias_rows(add(matmul_nt(zr, p.V), matmul_nt(xr, p.U)), p.b);
    apply_activation(pre, p.activation);
    return match_rank(std::move(pre), z);
}

Tensor residual_F(const BackboneParams& p, const Tensor& z, const Tensor& x) {
    return sub(f_forward(p, z, x), z);
}

Tensor head_logits(const ReadoutHead& h, const Tensor& z) {
    Tensor zr = as_row(z);
    if (zr.cols() != h.H.cols()) throw std::invalid_argument("head_logits: z width mismatch");
    return match_rank(add_bias_rows(matmul_nt(zr, h.H), h.c), z);
}

double spectral_rescale(Tensor& V, double sigma_max, int iters) {
    if (V.rank() != 2 || V.rows() != V.cols())
        throw std::invalid_argument("spectral_rescale: square matrix expected");
    if (sigma_max <= 0.0) throw std::invalid_argument("spectral_rescale: sigma_max must be > 0");
    const std::size_t n = V.rows();
    Tensor u = full({n}, 1.0 / std::sqrt(static_cast<double>(n)));
    Tensor v({n});
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += V.at(i, j) * u.at(j);
            v.at(i) = s;
        }
        const double nv = l2_norm(v);
        if (nv < 1e-300) return 0.0;
        for (auto& e : v.data) e /= nv;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += V.at(i, j) * v.at(i);
            u.at(j) = s;
        }
        sigma = l2_norm(u);
        if (sigma < 1e-300) return 0.0;
        for (auto& e : u.data) e /= sigma;
    }
    if (sigma > sigma_max) {
        const double r = sigma_max / sigma;
        for (auto& e : V.data) e *= r;
    }
    return sigma;
}

namespace {

int count_classes(const std::vector<int>& y) {
    int m = 0;
    for (int v : y) {
        if (v < 0) throw std::invalid_argument("labels must be non-negative");
        m = std::max(m, v + 1);
    }
    return m;
}

}  // namespace

Teacher train_teacher(const Dataset& data, const SolverConfig& solver_cfg,
                      const TeacherTrainConfig& cfg) {
    if (data.y.empty()) throw std::invalid_argument("train_teacher: classification dataset required");
    solver_cfg.validate();
    const std::size_t d_z = cfg.d_z, d_x = data.d_x();
    const int d_y = count_classes(data.y);
    Rng rng(cfg.seed);

    ParamStore ps;
    {
        Tensor V({d_z, d_z});
        for (auto& e : V.data) e = rng.normal() / std::sqrt(static_cast<double>(d_z));
        spectral_rescale(V, cfg.sigma_max);
        Tensor U({d_z, d_x});
        for (auto& e : U.data) e = rng.normal() / std::sqrt(static_cast<double>(d_x));
        Tensor H({static_cast<std::size_t>(d_y), d_z});
        for (auto& e : H.data) e = rng.normal() * 0.1;
        ps.add("V", std::move(V));
        ps.add("U", std::move(U));
        ps.add("b", Tensor({d_z}));
        ps.add("H", std::move(H));
        ps.add("c", Tensor({static_cast<std::size_t>(d_y)}));
    }

    SolverConfig inner = solver_cfg;
    inner.K_max = cfg.solve_K_max;
    inner.tol = cfg.solve_tol;

    BackboneParams live;
    live.activation = "tanh";
    auto sync_live = [&] {
        live.V = ps.values.at("V");
        live.U = ps.values.at("U");
        live.b = ps.values.at("b");
    };
    MapFn f = [&live](const Tensor& z, const Tensor& x) { return f_forward(live, z, x); };

    const Tensor Xtr = data.gather_X(data.train_idx);
    const std::vector<int> ytr = data.gather_y(data.train_idx);
    const std::size_t n_train = Xtr.rows();

    json epoch_log = json::array();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(n_train);
        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, n_train - start);
            Tensor Xb({bsz, d_x});
            std::vector<int> yb(bsz);
            for (std::size_t i = 0; i < bsz; ++i) {
                const std::size_t src = perm[start + i];
                for (std::size_t j = 0; j < d_x; ++j) Xb.at(i, j) = Xtr.at(src, j);
                yb[i] = ytr[src];
            }
            sync_live();
            std::vector<SolveTrace> trs =
                solve_rows(f, Xb, Tensor({d_z}), inner, SolveMethod::anderson);
            Tensor zstar({bsz, d_z});
            std::size_t aborted = 0;
            for (std::size_t i = 0; i < bsz; ++i) {
                if (trs[i].aborted_nonfinite) ++aborted;
                for (std::size_t j = 0; j < d_z; ++j)
                    zstar.at(i, j) = trs[i].states.back().at(j);
            }
            if (2 * aborted > bsz)
                throw NumericalError("train_teacher: solver diverged on " +
                                     std::to_string(aborted) + " of " + std::to_string(bsz) +
                                     " batch rows (epoch " + std::to_string(epoch) + ")");

            // One application of f at the frozen equilibrium carries the gradient.
            Tape tape;
            NodeId zc = tape.constant(zstar);
            NodeId xc = tape.constant(Xb);
            NodeId pre = tape.bias_add(
                tape.add(tape.matmul_nt(zc, tape.param(ps, "V")),
                         tape.matmul_nt(xc, tape.param(ps, "U"))),
                tape.param(ps, "b"));
            NodeId znew = tape.tanh_op(pre);
            NodeId logits =
                tape.bias_add(tape.matmul_nt(znew, tape.param(ps, "H")), tape.param(ps, "c"));
            NodeId loss = tape.softmax_ce(logits, yb);
            ps.zero_grad();
            tape.backward(loss);
            tape.harvest(ps);
            adam_step(ps, cfg.lr);
            if (cfg.rescale_spectral) spectral_rescale(ps.values.at("V"), cfg.sigma_max);
            loss_sum += tape.value(loss).at(0);
            ++n_batches;
        }
        epoch_log.push_back({{"epoch", epoch},
                             {"train_loss", loss_sum / static_cast<double>(n_batches)}});
    }

    Teacher t;
    sync_live();
    t.backbone = live;
    t.head.H = ps.values.at("H");
    t.head.c = ps.values.at("c");

    Tensor Vcopy = t.backbone.V;
    const double sigma_est = spectral_rescale(Vcopy, 1e12);
    const Tensor Xval = data.gather_X(data.val_idx);
    const std::vector<int> yval = data.gather_y(data.val_idx);
    t.metrics = {{"seed", cfg.seed},
                 {"epochs", cfg.epochs},
                 {"lr", cfg.lr},
                 {"batch_size", cfg.batch_size},
                 {"sigma_max", cfg.sigma_max},
                 {"sigma_estimate", sigma_est},
                 {"d_z", d_z},
                 {"d_x", d_x},
                 {"d_y", d_y},
                 {"final_train_loss",
                  epoch_log.empty() ? 0.0 : epoch_log.back()["train_loss"].get<double>()},
                 {"train_accuracy", teacher_accuracy(t, inner, cfg.solve_K_max, Xtr, ytr)},
                 {"val_accuracy", teacher_accuracy(t, inner, cfg.solve_K_max, Xval, yval)},
                 {"epoch_log", epoch_log}};
    return t;
}

double teacher_accuracy(const Teacher& t, const SolverConfig& solver_cfg, int K_eval,
                        const Tensor& X, const std::vector<int>& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("teacher_accuracy: X/y size mismatch");
    if (y.empty()) return 0.0;
    SolverConfig cfg = solver_cfg;
    cfg.K_max = K_eval;
    MapFn f = [&t](const Tensor& z, const Tensor& x) { return f_forward(t.backbone, z, x); };
    std::vector<SolveTrace> trs =
        solve_rows(f, X, Tensor({t.backbone.d_z()}), cfg, SolveMethod::anderson);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        Tensor logits = head_logits(t.head, trs[i].states.back());
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.numel(); ++j)
            if (logits.at(j) > logits.at(best)) best = j;
        if (static_cast<int>(best) == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

void save_teacher(const std::string& path, const Teacher& t, const json& extra) {
    json manifest = {{"type", "teacher"},
                     {"d_z", t.backbone.d_z()},
                     {"d_x", t.backbone.d_x()},
                     {"d_y", t.head.H.rows()},
                     {"activation", t.backbone.activation},
                     {"metrics", t.metrics}};
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    write_container(path, manifest,
                    {{"V", &t.backbone.V.data},
                     {"U", &t.backbone.U.data},
                     {"b", &t.backbone.b.data},
                     {"H", &t.head.H.data},
                     {"c", &t.head.c.data}});
}

Teacher load_teacher(const std::string& path, json* manifest_out) {
    Container c = read_container(path);
    if (c.manifest.value("type", "") != "teacher")
        throw std::runtime_error("load_teacher: not a teacher checkpoint: " + path);
    const std::size_t d_z = c.manifest.at("d_z"), d_x = c.manifest.at("d_x"),
                      d_y = c.manifest.at("d_y");
    Teacher t;
    t.backbone.activation = c.manifest.value("activation", "tanh");
    t.backbone.V = Tensor({d_z, d_z}, c.blocks.at("V"));
    t.backbone.U = Tensor({d_z, d_x}, c.blocks.at("U"));
    t.backbone.b = Tensor({d_z}, c.blocks.at("b"));
    t.head.H = Tensor({d_y, d_z}, c.blocks.at("H"));
    t.head.c = Tensor({d_y}, c.blocks.at("c"));
    if (c.manifest.contains("metrics")) t.metrics = c.manifest["metrics"];
    if (manifest_out) *manifest_out = c.manifest;
    return t;
}

}  // namespace cdeq
