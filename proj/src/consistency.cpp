#include "cdeq/consistency.hpp"

#include <cmath>
#include <stdexcept>

#include "cdeq/rng.hpp"

namespace cdeq {

double BoundaryCoeffs::c_skip(double t) const {
    const double u = (t - eps) / (T - eps);
    return gamma == 1.0 ? u : std::pow(u, gamma);
}

void BoundaryCoeffs::validate() const {
    if (!(T > eps)) throw std::invalid_argument("boundary: T must exceed eps");
    if (!(gamma >= 1.0)) throw std::invalid_argument("boundary: gamma must be >= 1");
}

json BoundaryCoeffs::to_json() const { return {{"eps", eps}, {"T", T}, {"gamma", gamma}}; }

BoundaryCoeffs BoundaryCoeffs::from_json(const json& j) {
    BoundaryCoeffs b;
    b.eps = j.at("eps");
    b.T = j.at("T");
    b.gamma = j.at("gamma");
    b.validate();
    return b;
}

StudentParams init_student(const Teacher& teacher, std::size_t d_t, const BoundaryCoeffs& bc,
                           std::uint64_t seed, double init_noise) {
    bc.validate();
    if (d_t < 1) throw std::invalid_argument("init_student: d_t must be >= 1");
    StudentParams sp;
    sp.trunk = teacher.backbone;
    sp.d_t = d_t;
    sp.bc = bc;
    const std::size_t d_z = sp.trunk.d_z();
    sp.W = Tensor({d_z, d_z + d_t});
    for (std::size_t i = 0; i < d_z; ++i) sp.W.at(i, i) = 1.0;
    Rng rng(seed);
    for (auto& e : sp.W.data) e += init_noise * rng.normal();
    return sp;
}

namespace {

Tensor as_row(const Tensor& v) {
    if (v.rank() == 2) return v;
    if (v.rank() != 1) throw std::invalid_argument("consistency: rank-1 or rank-2 input expected");
    return Tensor({1, v.numel()}, v.data);
}

Tensor match_rank(Tensor m, const Tensor& like) {
    if (like.rank() == 1) m.shape = {m.numel()};
    return m;
}

Tensor row_of(const Tensor& X, std::size_t i) {
    Tensor r({X.cols()});
    for (std::size_t j = 0; j < X.cols(); ++j) r.at(j) = X.at(i, j);
    return r;
}

}  // namespace

Tensor h_phi(const StudentParams& sp, const Tensor& z, double t, const Tensor& x) {
    Tensor zr = as_row(z), xr = as_row(x);
    Tensor u = f_forward(sp.trunk, zr, xr);
    Tensor tcol = full({zr.rows(), sp.d_t}, t);
    return match_rank(matmul_nt(concat_cols(u, tcol), sp.W), z);
}

Tensor g_phi(const BoundaryCoeffs& bc, const Tensor& P_value, const Tensor& z_t, double t) {
    if (t < bc.eps || t > bc.T) throw std::out_of_range("g_phi: t outside [eps, T]");
    check_same_shape(P_value, z_t, "g_phi");
    return lincomb(bc.c_skip(t), z_t, bc.c_out(t), P_value);
}

Tensor g_phi(const StudentParams& sp, const Tensor& z, double t, const Tensor& x) {
    return g_phi(sp.bc, h_phi(sp, z, t, x), z, t);
}

Tensor p_phi_one_step(const StudentParams& sp, const Tensor& z_t, double t, const Tensor& x) {
    return h_phi(sp, z_t, t, x);
}

std::pair<Tensor, Tensor> p_phi_aa(const std::vector<Tensor>& zs, const std::vector<Tensor>& hs,
                                   const SolverConfig& cfg, bool* ls_ok) {
    return anderson_step(zs, hs, cfg, ls_ok);
}

Tensor p_phi_aa(const StudentParams& sp, const Tensor& z_t, const Tensor& z_prev, double t,
                double t_prev, const Tensor& x, const SolverConfig& cfg, bool* ls_ok) {
    check_same_shape(z_t, z_prev, "p_phi_aa");
    if (z_t.rank() == 2) {
        Tensor h_prev = h_phi(sp, z_prev, t_prev, x);
        Tensor h_cur = h_phi(sp, z_t, t, x);
        Tensor out(z_t.shape);
        bool all_ok = true;
        for (std::size_t i = 0; i < z_t.rows(); ++i) {
            bool ok = true;
            auto [pi, alpha] = p_phi_aa({row_of(z_prev, i), row_of(z_t, i)},
                                        {row_of(h_prev, i), row_of(h_cur, i)}, cfg, &ok);
            if (!ok) {
                all_ok = false;
                for (std::size_t c = 0; c < out.cols(); ++c) out.at(i, c) = h_cur.at(i, c);
            } else {
                for (std::size_t c = 0; c < out.cols(); ++c) out.at(i, c) = pi.at(c);
            }
        }
        if (ls_ok) *ls_ok = all_ok;
        return out;
    }
    bool ok = true;
    Tensor h_cur = h_phi(sp, z_t, t, x);
    auto [p, alpha] =
        p_phi_aa({z_prev, z_t}, {h_phi(sp, z_prev, t_prev, x), h_cur}, cfg, &ok);
    if (ls_ok) *ls_ok = ok;
    if (!ok) return h_cur;  // least-squares breakdown: pure one-step prediction
    return p;
}

double InferenceSchedule::time_of(int j, const BoundaryCoeffs& bc) const {
    if (j < 0) throw std::out_of_range("inference schedule: j must be >= 0");
    return bc.eps + (1.0 - std::pow(beta_sched, j)) * (bc.T - bc.eps);
}

void InferenceSchedule::validate() const {
    if (J < 1) throw std::invalid_argument("inference schedule: J must be >= 1");
    if (!(beta_sched > 0.0) || !(beta_sched < 1.0))
        throw std::invalid_argument("inference schedule: beta_sched must be in (0, 1)");
}

InferenceResult infer(const StudentParams& sp, const Tensor& X, const InferenceSchedule& sched,
                      const SolverConfig& solver_cfg) {
    sched.validate();
    solver_cfg.validate();
    sp.bc.validate();
    const std::size_t B = X.rows(), d_z = sp.d_z();

    InferenceResult res;
    Tensor z_prev({B, d_z});
    Tensor h_prev = h_phi(sp, z_prev, sp.bc.eps, X);
    res.nfe = 1;
    res.states.push_back(z_prev);
    res.times.push_back(sched.time_of(0, sp.bc));
    Tensor z_cur = lincomb(sp.bc.c_skip(sp.bc.eps), z_prev, sp.bc.c_out(sp.bc.eps), h_prev);
    res.states.push_back(z_cur);
    res.times.push_back(sched.time_of(1, sp.bc));

    for (int j = 1; j < sched.J; ++j) {
        const double t_j = sched.time_of(j, sp.bc);
        Tensor h_cur = h_phi(sp, z_cur, t_j, X);
        res.nfe++;
        Tensor P({B, d_z});
        for (std::size_t i = 0; i < B; ++i) {
            bool ok = true;
            auto [pi, alpha] = p_phi_aa({row_of(z_prev, i), row_of(z_cur, i)},
                                        {row_of(h_prev, i), row_of(h_cur, i)}, solver_cfg, &ok);
            if (!ok) {
                res.ls_fallbacks++;
                for (std::size_t c = 0; c < d_z; ++c) P.at(i, c) = h_cur.at(i, c);
            } else {
                for (std::size_t c = 0; c < d_z; ++c) P.at(i, c) = pi.at(c);
            }
        }
        Tensor z_next = lincomb(sp.bc.c_skip(t_j), z_cur, sp.bc.c_out(t_j), P);
        z_prev = std::move(z_cur);
        h_prev = std::move(h_cur);
        z_cur = std::move(z_next);
        res.states.push_back(z_cur);
        res.times.push_back(sched.time_of(j + 1, sp.bc));
    }
    if (res.nfe != sched.J)
        throw std::logic_error("infer: evaluation count drifted from schedule");
    res.z_final = std::move(z_cur);
    return res;
}

void ema_update(StudentParams& ema, const StudentParams& p, double mu) {
    if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("ema_update: mu must be in [0, 1]");
    auto blend = [mu](Tensor& a, const Tensor& b) { a = lincomb(mu, a, 1.0 - mu, b); };
    blend(ema.trunk.V, p.trunk.V);
    blend(ema.trunk.U, p.trunk.U);
    blend(ema.trunk.b, p.trunk.b);
    blend(ema.W, p.W);
}

void save_student(const std::string& path, const StudentParams& sp, const json& extra) {
    json manifest = {{"type", "student"},
                     {"d_z", sp.d_z()},
                     {"d_x", sp.d_x()},
                     {"d_t", sp.d_t},
                     {"activation", sp.trunk.activation},
                     {"boundary", sp.bc.to_json()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    write_container(path, manifest,
                    {{"V", &sp.trunk.V.data},
                     {"U", &sp.trunk.U.data},
                     {"b", &sp.trunk.b.data},
                     {"W", &sp.W.data}});
}

StudentParams load_student(const std::string& path, json* manifest_out) {
    Container c = read_container(path);
    if (c.manifest.value("type", "") != "student")
        throw std::runtime_error("load_student: not a student checkpoint: " + path);
    const std::size_t d_z = c.manifest.at("d_z"), d_x = c.manifest.at("d_x"),
                      d_t = c.manifest.at("d_t");
    StudentParams sp;
    sp.trunk.activation = c.manifest.value("activation", "tanh");
    sp.trunk.V = Tensor({d_z, d_z}, c.blocks.at("V"));
    sp.trunk.U = Tensor({d_z, d_x}, c.blocks.at("U"));
    sp.trunk.b = Tensor({d_z}, c.blocks.at("b"));
    sp.W = Tensor({d_z, d_z + d_t}, c.blocks.at("W"));
    sp.d_t = d_t;
    sp.bc = BoundaryCoeffs::from_json(c.manifest.at("boundary"));
    if (manifest_out) *manifest_out = c.manifest;
    return sp;
}

}  // namespace cdeq
