#include "cdeq/distill.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "cdeq/errors.hpp"
#include "cdeq/rng.hpp"

namespace cdeq {

void LossConfig::validate() const {
    if (lambda1 < 0.0 || lambda1 > 1.0)
        throw std::invalid_argument("loss: lambda1 must be in [0, 1]");
    if (lambda2 < 0.0) throw std::invalid_argument("loss: lambda2 must be >= 0");
    if (metric != "mse" && metric != "l1")
        throw std::invalid_argument("loss: metric must be mse or l1");
    if (mu < 0.0 || mu >= 1.0) throw std::invalid_argument("loss: mu must be in [0, 1)");
}

json LossConfig::to_json() const {
    return {{"lambda1", lambda1},     {"lambda2", lambda2},
            {"metric", metric},       {"mu", mu},
            {"k_task_max", k_task_max}, {"train_entry_state", train_entry_state}};
}

void DistillConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("distill: epochs must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("distill: lr must be > 0");
    if (lr_decay != "none" && lr_decay != "cosine")
        throw std::invalid_argument("distill: lr_decay must be none or cosine");
    if (batch_size < 1) throw std::invalid_argument("distill: batch_size must be >= 1");
    if (init_noise < 0.0) throw std::invalid_argument("distill: init_noise must be >= 0");
}

json DistillConfig::to_json() const {
    return {{"epochs", epochs},       {"lr", lr},
            {"lr_decay", lr_decay},   {"batch_size", batch_size},
            {"seed", seed},           {"init_seed", init_seed},
            {"init_noise", init_noise}};
}

double metric_mean(const Tensor& a, const Tensor& b, const std::string& metric) {
    check_same_shape(a, b, "metric_mean");
    double s = 0.0;
    if (metric == "mse") {
        for (std::size_t i = 0; i < a.numel(); ++i) {
            const double d = a.data[i] - b.data[i];
            s += d * d;
        }
    } else if (metric == "l1") {
        for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(a.data[i] - b.data[i]);
    } else {
        throw std::invalid_argument("metric_mean: unknown metric '" + metric + "'");
    }
    return s / static_cast<double>(a.numel());
}

double loss_global(const StudentParams& sp, const Tensor& z_k, double t, const Tensor& x,
                   const Tensor& z_K, const std::string& metric) {
    return metric_mean(g_phi(sp, z_k, t, x), z_K, metric);
}

double loss_local(const StudentParams& sp, const StudentParams& ema, const Tensor& z_k, double t,
                  const Tensor& z_prev, double t_prev, const Tensor& x,
                  const std::string& metric) {
    return metric_mean(g_phi(sp, z_k, t, x), g_phi(ema, z_prev, t_prev, x), metric);
}

namespace {

void check_traj_k(const TrajectorySet& ts, std::size_t i, int k) {
    if (i >= ts.n()) throw std::out_of_range("loss: trajectory index out of range");
    if (k < 1 || k > ts.K()) throw std::out_of_range("loss: k outside [1, K]");
}

}  // namespace

double loss_global(const StudentParams& sp, const TrajectorySet& ts, std::size_t i, int k,
                   const std::string& metric) {
    check_traj_k(ts, i, k);
    return loss_global(sp, ts.state_row(i, k), ts.tmap.time_of(k), ts.x_row(i),
                       ts.state_row(i, ts.K()), metric);
}

double loss_local(const StudentParams& sp, const StudentParams& ema, const TrajectorySet& ts,
                  std::size_t i, int k, const std::string& metric) {
    check_traj_k(ts, i, k);
    return loss_local(sp, ema, ts.state_row(i, k), ts.tmap.time_of(k), ts.state_row(i, k - 1),
                      ts.tmap.time_of(k - 1), ts.x_row(i), metric);
}

double loss_task(const StudentParams& sp, const ReadoutHead& head, const TrajectorySet& ts,
                 std::size_t i, int k, int y) {
    check_traj_k(ts, i, k);
    return loss_task(sp, head, ts.state_row(i, k), ts.tmap.time_of(k), ts.x_row(i), {y});
}

double loss_task(const StudentParams& sp, const ReadoutHead& head, const Tensor& z_k, double t,
                 const Tensor& x, const std::vector<int>& y) {
    Tensor logits = head_logits(head, g_phi(sp, z_k, t, x));
    if (logits.rank() == 1) logits = Tensor({1, logits.numel()}, logits.data);
    if (logits.rows() != y.size()) throw std::invalid_argument("loss_task: y size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= logits.cols())
            throw std::out_of_range("loss_task: label out of range");
        double mx = logits.at(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits.at(i, j));
        double den = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) den += std::exp(logits.at(i, j) - mx);
        s += -(logits.at(i, static_cast<std::size_t>(y[i])) - mx - std::log(den));
    }
    return s / static_cast<double>(logits.rows());
}

namespace {

StudentParams snapshot(const ParamStore& ps, const StudentParams& like) {
    StudentParams sp = like;
    sp.trunk.V = ps.values.at("V");
    sp.trunk.U = ps.values.at("U");
    sp.trunk.b = ps.values.at("b");
    sp.W = ps.values.at("W");
    return sp;
}

NodeId trunk_activation(Tape& tape, NodeId pre, const std::string& act) {
    if (act == "tanh") return tape.tanh_op(pre);
    if (act == "relu") return tape.relu(pre);
    if (act == "identity") return pre;
    throw std::invalid_argument("distill: unknown trunk activation '" + act + "'");
}

Tensor gather_rows(const Tensor& M, const std::vector<std::size_t>& rows) {
    Tensor out({rows.size(), M.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) out.at(i, j) = M.at(rows[i], j);
    return out;
}

Tensor gather_states(const TrajectorySet& ts, const std::vector<std::size_t>& idx, int k) {
    Tensor out({idx.size(), ts.d_z()});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Tensor& s = ts.states[idx[i]];
        for (std::size_t j = 0; j < ts.d_z(); ++j) out.at(i, j) = s.at(static_cast<std::size_t>(k), j);
    }
    return out;
}

double nfe1_accuracy(const StudentParams& sp, const ReadoutHead& head, const Tensor& X,
                     const std::vector<int>& y) {
    if (y.empty()) return 0.0;
    InferenceSchedule sched;
    sched.J = 1;
    InferenceResult r = infer(sp, X, sched, SolverConfig{});
    std::size_t hits = 0;
    Tensor logits = head_logits(head, r.z_final);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        if (static_cast<int>(best) == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

DistillResult distill(const TrajectorySet& ts, const std::vector<int>& y_train,
                      const Teacher& teacher, const Tensor& X_val, const std::vector<int>& y_val,
                      const LossConfig& loss_cfg, const DistillConfig& cfg) {
    loss_cfg.validate();
    cfg.validate();
    ts.tmap.validate();
    const std::size_t N = ts.n();
    if (N == 0) throw std::invalid_argument("distill: empty trajectory set");
    if (y_train.size() != N) throw std::invalid_argument("distill: y_train size mismatch");
    if (teacher.backbone.d_z() != ts.d_z())
        throw std::invalid_argument("distill: teacher/cache width mismatch");

    const int K = ts.K();
    const int k_task_max = loss_cfg.k_task_max < 0 ? K / 4 : loss_cfg.k_task_max;
    const int k_lo = loss_cfg.train_entry_state ? 0 : 1;
    const std::vector<double> tgrid = ts.tmap.grid();

    BoundaryCoeffs bc;
    bc.eps = ts.tmap.eps;
    bc.T = ts.tmap.T;
    StudentParams init = init_student(teacher, 4, bc, cfg.init_seed, cfg.init_noise);

    ParamStore ps;
    ps.add("V", init.trunk.V);
    ps.add("U", init.trunk.U);
    ps.add("b", init.trunk.b);
    ps.add("W", init.W);
    StudentParams ema = init;

    const std::string config_hash = [&] {
        const std::string s =
            loss_cfg.to_json().dump() + cfg.to_json().dump() + ts.tmap.to_json().dump();
        return hex64(fnv1a64(s.data(), s.size()));
    }();

    DistillResult res;
    Rng rng(cfg.seed);
    long total_skips = 0;
    int consecutive_skips = 0;

    for (int ep = 0; ep < cfg.epochs; ++ep) {
        double cur_lr = cfg.lr;
        if (cfg.lr_decay == "cosine")
            cur_lr = cfg.lr *
                     (0.05 + 0.95 * 0.5 *
                                 (1.0 + std::cos(std::numbers::pi * static_cast<double>(ep) /
                                                 static_cast<double>(cfg.epochs))));
        const std::vector<std::size_t> perm = rng.permutation(N);
        std::vector<int> ks(N);
        for (std::size_t i = 0; i < N; ++i)
            ks[i] = k_lo + static_cast<int>(rng.integer(static_cast<std::uint64_t>(K - k_lo) + 1));

        double ep_loss = 0.0, ep_global = 0.0, ep_local = 0.0, ep_task = 0.0;
        long ep_skips = 0;

        for (std::size_t s = 0; s < N; s += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, N - s);
            std::map<int, std::vector<std::size_t>> groups;
            for (std::size_t i = 0; i < bsz; ++i) {
                const std::size_t idx = perm[s + i];
                groups[ks[idx]].push_back(idx);
            }

            Tape tape;
            NodeId Vn = tape.param(ps, "V");
            NodeId Un = tape.param(ps, "U");
            NodeId bn = tape.param(ps, "b");
            NodeId Wn = tape.param(ps, "W");
            NodeId total = -1;
            double b_global = 0.0, b_local = 0.0, b_task = 0.0;

            for (const auto& [kval, idx] : groups) {
                const std::size_t nb = idx.size();
                const double w = static_cast<double>(nb) / static_cast<double>(bsz);
                const double t = tgrid[static_cast<std::size_t>(kval)];

                NodeId zc = tape.constant(gather_states(ts, idx, kval));
                NodeId xc = tape.constant(gather_rows(ts.X, idx));
                NodeId pre = tape.bias_add(
                    tape.add(tape.matmul_nt(zc, Vn), tape.matmul_nt(xc, Un)), bn);
                NodeId fz = trunk_activation(tape, pre, init.trunk.activation);
                NodeId cat = tape.concat(fz, tape.constant(full({nb, init.d_t}, t)));
                NodeId h = tape.matmul_nt(cat, Wn);
                NodeId g = tape.add(tape.scale(zc, bc.c_skip(t)), tape.scale(h, bc.c_out(t)));

                auto metric_node = [&](NodeId pred, NodeId target) {
                    return loss_cfg.metric == "mse" ? tape.mse(pred, target)
                                                    : tape.l1(pred, target);
                };
                auto accumulate = [&](NodeId term, double weight) {
                    NodeId scaled = tape.scale(term, weight);
                    total = total < 0 ? scaled : tape.add(total, scaled);
                };

                NodeId lg = metric_node(g, tape.constant(gather_states(ts, idx, K)));
                accumulate(lg, loss_cfg.lambda1 * w);
                b_global += tape.value(lg).at(0) * w;

                if (kval >= 1) {
                    const double t_prev = tgrid[static_cast<std::size_t>(kval - 1)];
                    Tensor target =
                        g_phi(ema, gather_states(ts, idx, kval - 1), t_prev, gather_rows(ts.X, idx));
                    NodeId ll = metric_node(g, tape.constant(std::move(target)));
                    accumulate(ll, (1.0 - loss_cfg.lambda1) * w);
                    b_local += tape.value(ll).at(0) * w;
                }

                if (loss_cfg.lambda2 > 0.0 && kval <= k_task_max) {
                    NodeId logits = tape.bias_add(
                        tape.matmul_nt(g, tape.constant(teacher.head.H)),
                        tape.constant(teacher.head.c));
                    std::vector<int> ym(nb);
                    for (std::size_t i = 0; i < nb; ++i) ym[i] = y_train[idx[i]];
                    NodeId ce = tape.softmax_ce(logits, ym);
                    accumulate(ce, loss_cfg.lambda2 * w);
                    b_task += tape.value(ce).at(0) * w;
                }
            }

            const double batch_loss = tape.value(total).at(0);
            if (!std::isfinite(batch_loss)) {
                ++total_skips;
                ++ep_skips;
                if (++consecutive_skips >= 10)
                    throw NumericalError("distill: 10 consecutive non-finite losses");
                continue;
            }
            consecutive_skips = 0;
            ps.zero_grad();
            tape.backward(total);
            tape.harvest(ps);
            adam_step(ps, cur_lr);
            ema_update(ema, snapshot(ps, init), loss_cfg.mu);

            const double bw = static_cast<double>(bsz) / static_cast<double>(N);
            ep_loss += batch_loss * bw;
            ep_global += b_global * bw;
            ep_local += b_local * bw;
            ep_task += b_task * bw;
        }

        StudentParams cur = snapshot(ps, init);
        res.epoch_log.push_back({{"epoch", ep},
                                 {"lr", cur_lr},
                                 {"loss", ep_loss},
                                 {"loss_global", ep_global},
                                 {"loss_local", ep_local},
                                 {"loss_task", ep_task},
                                 {"val_nfe1_acc", nfe1_accuracy(cur, teacher.head, X_val, y_val)},
                                 {"nonfinite_skips", ep_skips},
                                 {"seed", cfg.seed},
                                 {"config_hash", config_hash}});
    }

    res.student = snapshot(ps, init);
    res.student_ema = ema;
    res.events = {{"nonfinite_skips", total_skips},
                  {"seed", cfg.seed},
                  {"config_hash", config_hash}};
    return res;
}

}  // namespace cdeq
