#include "cdeq/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "cdeq/errors.hpp"
#include "cdeq/rng.hpp"

namespace cdeq {

double TimeMap::time_of(int k) const {
    if (k < 0) throw std::out_of_range("time_of: k must be >= 0");
    return eps + (1.0 - std::exp(-rho * static_cast<double>(k))) * (T - eps);
}

std::vector<double> TimeMap::grid() const {
    std::vector<double> g(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) g[static_cast<std::size_t>(k)] = time_of(k);
    return g;
}

void TimeMap::validate() const {
    if (!(T > eps)) throw std::invalid_argument("time map: T must exceed eps");
    if (!(rho > 0.0)) throw std::invalid_argument("time map: rho must be > 0");
    if (K < 1) throw std::invalid_argument("time map: K must be >= 1");
    if (!std::isfinite(eps) || !std::isfinite(T) || !std::isfinite(rho))
        throw std::invalid_argument("time map: non-finite parameter");
}

json TimeMap::to_json() const { return {{"eps", eps}, {"T", T}, {"rho", rho}, {"K", K}}; }

TimeMap TimeMap::from_json(const json& j) {
    TimeMap t;
    t.eps = j.at("eps");
    t.T = j.at("T");
    t.rho = j.at("rho");
    t.K = j.at("K");
    t.validate();
    return t;
}

void AugmentConfig::validate(int K) const {
    if (p_aug < 0.0 || p_aug > 1.0)
        throw std::invalid_argument("augment: p_aug must be in [0, 1]");
    if (k_min < 1) throw std::invalid_argument("augment: k_min must be >= 1 (k=0 is protected)");
    if (k_tail < 1) throw std::invalid_argument("augment: k_tail must be >= 1");
    if (k_min > K - k_tail)
        throw std::invalid_argument("augment: need k_min <= K - k_tail");
}

json AugmentConfig::to_json() const {
    return {{"p_aug", p_aug}, {"k_min", k_min}, {"k_tail", k_tail}};
}

AugmentConfig AugmentConfig::from_json(const json& j) {
    AugmentConfig a;
    a.p_aug = j.at("p_aug");
    a.k_min = j.at("k_min");
    a.k_tail = j.at("k_tail");
    return a;
}

Tensor TrajectorySet::state_row(std::size_t i, int k) const {
    const Tensor& s = states.at(i);
    if (k < 0 || static_cast<std::size_t>(k) >= s.rows())
        throw std::out_of_range("state_row: k outside trajectory");
    Tensor r({s.cols()});
    for (std::size_t j = 0; j < s.cols(); ++j) r.at(j) = s.at(static_cast<std::size_t>(k), j);
    return r;
}

Tensor TrajectorySet::x_row(std::size_t i) const {
    Tensor r({X.cols()});
    for (std::size_t j = 0; j < X.cols(); ++j) r.at(j) = X.at(i, j);
    return r;
}

TrajectorySet sample_trajectories(const Teacher& teacher, const Tensor& X,
                                  const SolverConfig& solver_cfg, const TimeMap& tmap,
                                  const AugmentConfig& aug, std::uint64_t seed,
                                  const std::string& z0_policy, json meta) {
    tmap.validate();
    aug.validate(tmap.K);
    if (z0_policy != "zeros" && z0_policy != "normal")
        throw std::invalid_argument("sample_trajectories: z0_policy must be zeros or normal");
    const std::size_t d_z = teacher.backbone.d_z();
    const std::size_t N = X.rows();
    MapFn f = [&teacher](const Tensor& z, const Tensor& x) {
        return f_forward(teacher.backbone, z, x);
    };

    Rng rng(seed);
    Tensor z0_rows({N, d_z});
    if (z0_policy == "normal")
        for (auto& e : z0_rows.data) e = rng.normal();

    TrajectorySet ts;
    ts.X = X;
    ts.tmap = tmap;
    ts.states.reserve(N);
    ts.aug_mask.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        Tensor x_i({X.cols()}), z0_i({d_z});
        for (std::size_t j = 0; j < X.cols(); ++j) x_i.at(j) = X.at(i, j);
        for (std::size_t j = 0; j < d_z; ++j) z0_i.at(j) = z0_rows.at(i, j);
        SolveTrace tr = solve_exact_steps(f, x_i, z0_i, solver_cfg, tmap.K);
        if (tr.aborted_nonfinite)
            throw NumericalError("sample_trajectories: non-finite state on row " +
                                 std::to_string(i));
        Tensor s({static_cast<std::size_t>(tmap.K) + 1, d_z});
        for (int k = 0; k <= tmap.K; ++k)
            for (std::size_t j = 0; j < d_z; ++j)
                s.at(static_cast<std::size_t>(k), j) = tr.states[static_cast<std::size_t>(k)].at(j);
        ts.states.push_back(std::move(s));
        ts.aug_mask.emplace_back(static_cast<std::size_t>(tmap.K) + 1, 0);
    }
    for (std::size_t i = 0; i < N; ++i) {
        Tensor& s = ts.states[i];
        for (int k = 0; k <= tmap.K; ++k) {
            if (!aug.eligible(k, tmap.K)) continue;
            if (rng.uniform() < aug.p_aug) {
                for (std::size_t j = 0; j < d_z; ++j)
                    s.at(static_cast<std::size_t>(k), j) = s.at(static_cast<std::size_t>(tmap.K), j);
                ts.aug_mask[i][static_cast<std::size_t>(k)] = 1;
            }
        }
    }
    ts.meta = std::move(meta);
    ts.meta["seed"] = seed;
    ts.meta["z0_policy"] = z0_policy;
    ts.meta["augment"] = aug.to_json();
    ts.meta["solver"] = {{"m", solver_cfg.m},
                         {"beta_aa", solver_cfg.beta_aa},
                         {"ridge", solver_cfg.ridge}};
    return ts;
}

void write_cache(const std::string& path, const TrajectorySet& ts) {
    const std::size_t N = ts.n();
    const std::size_t rows = static_cast<std::size_t>(ts.K()) + 1, d_z = ts.d_z();

    std::vector<double> states_blk, mask_blk, times_blk = ts.tmap.grid();
    states_blk.reserve(N * rows * d_z);
    mask_blk.reserve(N * rows);
    for (std::size_t i = 0; i < N; ++i) {
        if (ts.states[i].rows() != rows || ts.states[i].cols() != d_z)
            throw std::invalid_argument("write_cache: ragged trajectory set");
        states_blk.insert(states_blk.end(), ts.states[i].data.begin(), ts.states[i].data.end());
        for (std::size_t k = 0; k < rows; ++k)
            mask_blk.push_back(static_cast<double>(ts.aug_mask[i][k]));
    }

    json manifest = {{"type", "trajectories"},
                     {"n", N},
                     {"d_x", ts.X.cols()},
                     {"d_z", d_z},
                     {"K", ts.K()},
                     {"time_map", ts.tmap.to_json()},
                     {"meta", ts.meta}};
    write_container(path, manifest,
                    {{"x", &ts.X.data},
                     {"states", &states_blk},
                     {"times", &times_blk},
                     {"aug_mask", &mask_blk}});
}

TrajectorySet read_cache(const std::string& path) {
    Container c = read_container(path);
    if (c.manifest.value("type", "") != "trajectories")
        throw std::runtime_error("read_cache: not a trajectory cache: " + path);
    const std::size_t N = c.manifest.at("n"), d_x = c.manifest.at("d_x"),
                      d_z = c.manifest.at("d_z");
    TrajectorySet ts;
    ts.tmap = TimeMap::from_json(c.manifest.at("time_map"));
    const std::size_t rows = static_cast<std::size_t>(ts.tmap.K) + 1;
    ts.meta = c.manifest.value("meta", json::object());
    ts.X = Tensor({N, d_x}, c.blocks.at("x"));

    const std::vector<double>& states_blk = c.blocks.at("states");
    const std::vector<double>& mask_blk = c.blocks.at("aug_mask");
    const std::vector<double>& times_blk = c.blocks.at("times");
    if (states_blk.size() != N * rows * d_z || mask_blk.size() != N * rows ||
        times_blk.size() != rows)
        throw std::runtime_error("read_cache: block sizes disagree with manifest");
    const std::vector<double> expect = ts.tmap.grid();
    for (std::size_t k = 0; k < rows; ++k)
        if (times_blk[k] != expect[k])
            throw std::runtime_error("read_cache: stored time grid disagrees with manifest");

    ts.states.reserve(N);
    ts.aug_mask.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        Tensor s({rows, d_z},
                 std::vector<double>(states_blk.begin() + static_cast<std::ptrdiff_t>(i * rows * d_z),
                                     states_blk.begin() + static_cast<std::ptrdiff_t>((i + 1) * rows * d_z)));
        std::vector<std::uint8_t> mask(rows);
        for (std::size_t k = 0; k < rows; ++k)
            mask[k] = mask_blk[i * rows + k] != 0.0 ? 1 : 0;
        ts.states.push_back(std::move(s));
        ts.aug_mask.push_back(std::move(mask));
    }
    return ts;
}

}  // namespace cdeq
