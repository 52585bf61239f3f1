#include "cdeq/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace cdeq {

namespace {

enum class KeyType { number, integer, string, boolean, array_number, array_integer };

const std::map<std::string, std::map<std::string, KeyType>>& schema() {
    static const std::map<std::string, std::map<std::string, KeyType>> s = {
        {"dataset",
         {{"name", KeyType::string},
          {"n", KeyType::integer},
          {"noise", KeyType::number},
          {"seed", KeyType::integer}}},
        {"teacher",
         {{"d_z", KeyType::integer},
          {"sigma_max", KeyType::number},
          {"rescale_spectral", KeyType::boolean},
          {"epochs", KeyType::integer},
          {"lr", KeyType::number},
          {"batch_size", KeyType::integer},
          {"seed", KeyType::integer},
          {"solve_K_max", KeyType::integer},
          {"solve_tol", KeyType::number}}},
        {"solver",
         {{"m", KeyType::integer},
          {"beta_aa", KeyType::number},
          {"K_max", KeyType::integer},
          {"tol", KeyType::number},
          {"ridge", KeyType::number}}},
        {"time_map",
         {{"eps", KeyType::number},
          {"T", KeyType::number},
          {"rho", KeyType::number},
          {"K", KeyType::integer}}},
        {"augment",
         {{"p_aug", KeyType::number},
          {"k_min", KeyType::integer},
          {"k_tail", KeyType::integer}}},
        {"sample", {{"seed", KeyType::integer}, {"z0_policy", KeyType::string}}},
        {"loss",
         {{"lambda1", KeyType::number},
          {"lambda2", KeyType::number},
          {"metric", KeyType::string},
          {"mu", KeyType::number},
          {"k_task_max", KeyType::integer},
          {"train_entry_state", KeyType::boolean}}},
        {"distill",
         {{"epochs", KeyType::integer},
          {"lr", KeyType::number},
          {"lr_decay", KeyType::string},
          {"batch_size", KeyType::integer},
          {"seed", KeyType::integer},
          {"init_seed", KeyType::integer},
          {"init_noise", KeyType::number}}},
        {"eval",
         {{"J_list", KeyType::array_integer},
          {"beta_sched", KeyType::number},
          {"J_max", KeyType::integer}}},
        {"ablate",
         {{"lambda1_grid", KeyType::array_number},
          {"lambda2_grid", KeyType::array_number},
          {"epochs", KeyType::integer},
          {"eval_J", KeyType::integer},
          {"beta_sched", KeyType::number}}},
    };
    return s;
}

bool type_matches(const json& v, KeyType t) {
    switch (t) {
        case KeyType::number: return v.is_number();
        case KeyType::integer: return v.is_number_integer();
        case KeyType::string: return v.is_string();
        case KeyType::boolean: return v.is_boolean();
        case KeyType::array_number:
            if (!v.is_array()) return false;
            for (const auto& e : v)
                if (!e.is_number()) return false;
            return true;
        case KeyType::array_integer:
            if (!v.is_array()) return false;
            for (const auto& e : v)
                if (!e.is_number_integer()) return false;
            return true;
    }
    return false;
}

class StopWatch {
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();

public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }
};

void write_report(const std::string& path, const json& report) {
    if (path.empty()) return;
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write report: " + path);
    out << report.dump(2) << "\n";
}

json base_report(const std::string& command, const json& cfg) {
    return {{"command", command}, {"config", cfg}, {"metrics", json::object()},
            {"events", json::object()}, {"timing_ms", 0.0}};
}

Tensor row_of(const Tensor& X, std::size_t i) {
    Tensor r({X.cols()});
    for (std::size_t j = 0; j < X.cols(); ++j) r.at(j) = X.at(i, j);
    return r;
}

}  // namespace

json default_config() {
    return {
        {"dataset", {{"name", "two_moons"}, {"n", 1000}, {"noise", 0.1}, {"seed", 123}}},
        {"teacher",
         {{"d_z", 16},
          {"sigma_max", 0.9},
          {"rescale_spectral", true},
          {"epochs", 60},
          {"lr", 5e-3},
          {"batch_size", 64},
          {"seed", 1},
          {"solve_K_max", 30},
          {"solve_tol", 1e-6}}},
        {"solver",
         {{"m", 5}, {"beta_aa", 1.0}, {"K_max", 100}, {"tol", 1e-6}, {"ridge", 1e-8}}},
        {"time_map", {{"eps", 0.0}, {"T", 1.0}, {"rho", 0.25}, {"K", 20}}},
        {"augment", {{"p_aug", 0.1}, {"k_min", 1}, {"k_tail", 2}}},
        {"sample", {{"seed", 11}, {"z0_policy", "zeros"}}},
        {"loss",
         {{"lambda1", 0.8},
          {"lambda2", 0.05},
          {"metric", "mse"},
          {"mu", 0.99},
          {"k_task_max", -1},
          {"train_entry_state", false}}},
        {"distill",
         {{"epochs", 200},
          {"lr", 1e-3},
          {"lr_decay", "none"},
          {"batch_size", 64},
          {"seed", 7},
          {"init_seed", 23},
          {"init_noise", 1e-3}}},
        {"eval", {{"J_list", {1, 2, 3, 5}}, {"beta_sched", 0.5}, {"J_max", 6}}},
        {"ablate",
         {{"lambda1_grid", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}},
          {"lambda2_grid", {0.0, 0.05}},
          {"epochs", 100},
          {"eval_J", 5},
          {"beta_sched", 0.5}}},
    };
}

void validate_config(const json& cfg) {
    if (!cfg.is_object()) throw std::invalid_argument("config: top level must be an object");
    const auto& sch = schema();
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const auto sec = sch.find(it.key());
        if (sec == sch.end())
            throw std::invalid_argument("config: unknown section '" + it.key() + "'");
        if (!it.value().is_object())
            throw std::invalid_argument("config: section '" + it.key() + "' must be an object");
        for (auto kv = it.value().begin(); kv != it.value().end(); ++kv) {
            const auto ent = sec->second.find(kv.key());
            if (ent == sec->second.end())
                throw std::invalid_argument("config: unknown key '" + it.key() + "." + kv.key() +
                                            "'");
            if (!type_matches(kv.value(), ent->second))
                throw std::invalid_argument("config: wrong type for '" + it.key() + "." +
                                            kv.key() + "'");
        }
    }
}

json merge_validated(const json& user) {
    validate_config(user);
    json cfg = default_config();
    for (auto it = user.begin(); it != user.end(); ++it)
        for (auto kv = it.value().begin(); kv != it.value().end(); ++kv)
            cfg[it.key()][kv.key()] = kv.value();
    validate_config(cfg);
    return cfg;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    json user = json::parse(in);
    return merge_validated(user);
}

SolverConfig solver_from(const json& cfg) {
    const json& s = cfg.at("solver");
    SolverConfig c;
    c.m = s.at("m");
    c.beta_aa = s.at("beta_aa");
    c.K_max = s.at("K_max");
    c.tol = s.at("tol");
    c.ridge = s.at("ridge");
    c.validate();
    return c;
}

TimeMap timemap_from(const json& cfg) { return TimeMap::from_json(cfg.at("time_map")); }

AugmentConfig augment_from(const json& cfg) {
    AugmentConfig a = AugmentConfig::from_json(cfg.at("augment"));
    a.validate(timemap_from(cfg).K);
    return a;
}

LossConfig loss_from(const json& cfg) {
    const json& l = cfg.at("loss");
    LossConfig c;
    c.lambda1 = l.at("lambda1");
    c.lambda2 = l.at("lambda2");
    c.metric = l.at("metric");
    c.mu = l.at("mu");
    c.k_task_max = l.at("k_task_max");
    c.train_entry_state = l.at("train_entry_state");
    c.validate();
    return c;
}

DistillConfig distill_cfg_from(const json& cfg) {
    const json& d = cfg.at("distill");
    DistillConfig c;
    c.epochs = d.at("epochs");
    c.lr = d.at("lr");
    c.lr_decay = d.at("lr_decay");
    c.batch_size = d.at("batch_size");
    c.seed = d.at("seed");
    c.init_seed = d.at("init_seed");
    c.init_noise = d.at("init_noise");
    c.validate();
    return c;
}

TeacherTrainConfig teacher_cfg_from(const json& cfg) {
    const json& t = cfg.at("teacher");
    TeacherTrainConfig c;
    c.d_z = t.at("d_z");
    c.sigma_max = t.at("sigma_max");
    c.rescale_spectral = t.at("rescale_spectral");
    c.epochs = t.at("epochs");
    c.lr = t.at("lr");
    c.batch_size = t.at("batch_size");
    c.seed = t.at("seed");
    c.solve_K_max = t.at("solve_K_max");
    c.solve_tol = t.at("solve_tol");
    return c;
}

Dataset dataset_from(const json& cfg) {
    const json& d = cfg.at("dataset");
    return make_dataset(d.at("name"), d.at("n"), d.at("noise"), d.at("seed"));
}

double mean_rel_residual(const BackboneParams& fb, const Tensor& Z, const Tensor& X) {
    if (Z.rows() != X.rows()) throw std::invalid_argument("mean_rel_residual: batch mismatch");
    Tensor F = f_forward(fb, Z, X);
    double s = 0.0;
    for (std::size_t i = 0; i < Z.rows(); ++i)
        s += relative_residual(row_of(Z, i), row_of(F, i));
    return s / static_cast<double>(Z.rows());
}

BaselineCurves solver_residual_curves(const Teacher& t, const Tensor& X, int J_max,
                                      const SolverConfig& cfg) {
    MapFn f = [&t](const Tensor& z, const Tensor& x) { return f_forward(t.backbone, z, x); };
    const std::size_t d_z = t.backbone.d_z();
    BaselineCurves out;
    for (SolveMethod method : {SolveMethod::anderson, SolveMethod::picard}) {
        std::vector<SolveTrace> trs = solve_rows_exact(f, X, Tensor({d_z}), cfg, J_max, method);
        std::vector<double>& curve =
            method == SolveMethod::anderson ? out.aa : out.picard;
        for (int j = 1; j <= J_max; ++j) {
            Tensor Z({X.rows(), d_z});
            for (std::size_t i = 0; i < X.rows(); ++i)
                for (std::size_t c = 0; c < d_z; ++c)
                    Z.at(i, c) = trs[i].states[static_cast<std::size_t>(j)].at(c);
            curve.push_back(mean_rel_residual(t.backbone, Z, X));
        }
    }
    return out;
}

std::vector<double> student_residual_curve(const Teacher& t, const StudentParams& sp,
                                           const Tensor& X, int J_max, double beta_sched,
                                           const SolverConfig& cfg) {
    InferenceSchedule sched;
    sched.J = J_max;
    sched.beta_sched = beta_sched;
    InferenceResult r = infer(sp, X, sched, cfg);
    std::vector<double> curve;
    for (int j = 1; j <= J_max; ++j)
        curve.push_back(mean_rel_residual(t.backbone, r.states[static_cast<std::size_t>(j)], X));
    return curve;
}

double accuracy_from_states(const ReadoutHead& head, const Tensor& Z, const std::vector<int>& y) {
    if (Z.rows() != y.size()) throw std::invalid_argument("accuracy: batch mismatch");
    if (y.empty()) return 0.0;
    Tensor logits = head_logits(head, Z);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        if (static_cast<int>(best) == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

json eval_accuracy_vs_nfe(const Teacher& t, const StudentParams& sp, const Tensor& X,
                          const std::vector<int>& y, const std::vector<int>& J_list,
                          double beta_sched, const SolverConfig& cfg, int K_teacher) {
    json table = json::array();
    for (int J : J_list) {
        if (J < 1) throw std::invalid_argument("eval: NFE list entries must be positive");
        InferenceSchedule sched;
        sched.J = J;
        sched.beta_sched = beta_sched;
        InferenceResult r = infer(sp, X, sched, cfg);
        table.push_back({{"J", J},
                         {"nfe", r.nfe},
                         {"accuracy", accuracy_from_states(t.head, r.z_final, y)}});
    }
    table.push_back({{"J", K_teacher},
                     {"nfe", K_teacher},
                     {"baseline", "teacher_aa"},
                     {"accuracy", teacher_accuracy(t, cfg, K_teacher, X, y)}});
    return table;
}

json run_train_teacher(const json& cfg, const std::string& out_teacher,
                       const std::string& report_path) {
    StopWatch sw;
    Dataset ds = dataset_from(cfg);
    Teacher t = train_teacher(ds, solver_from(cfg), teacher_cfg_from(cfg));
    {
        const std::filesystem::path p(out_teacher);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    }
    save_teacher(out_teacher, t, {{"dataset", cfg.at("dataset")}});

    json report = base_report("train-teacher", cfg);
    report["seed"] = cfg.at("teacher").at("seed");
    json metrics = t.metrics;
    json log = metrics.contains("epoch_log") ? metrics["epoch_log"] : json::array();
    metrics.erase("epoch_log");
    report["metrics"] = metrics;
    report["log"] = log;
    report["artifacts"] = {{"teacher", out_teacher}};
    report["timing_ms"] = sw.ms();
    write_report(report_path, report);
    return report;
}

json run_sample_traj(const json& cfg, const std::string& teacher_path,
                     const std::string& out_cache, const std::string& report_path) {
    StopWatch sw;
    Teacher t = load_teacher(teacher_path);
    Dataset ds = dataset_from(cfg);
    const TimeMap tmap = timemap_from(cfg);
    const AugmentConfig aug = augment_from(cfg);
    const std::uint64_t seed = cfg.at("sample").at("seed");
    const std::string z0_policy = cfg.at("sample").at("z0_policy");

    TrajectorySet ts = sample_trajectories(
        t, ds.gather_X(ds.train_idx), solver_from(cfg), tmap, aug, seed, z0_policy,
        {{"dataset", cfg.at("dataset")}, {"split", "train"}});
    {
        const std::filesystem::path p(out_cache);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    }
    write_cache(out_cache, ts);

    long replaced = 0, eligible = 0;
    bool protected_clean = true;
    for (std::size_t i = 0; i < ts.n(); ++i) {
        for (int k = 0; k <= tmap.K; ++k) {
            if (aug.eligible(k, tmap.K)) {
                ++eligible;
                replaced += ts.aug_mask[i][static_cast<std::size_t>(k)];
            } else if (ts.aug_mask[i][static_cast<std::size_t>(k)]) {
                protected_clean = false;
            }
        }
    }
    json report = base_report("sample-traj", cfg);
    report["seed"] = seed;
    report["metrics"] = {
        {"n", ts.n()},
        {"K", tmap.K},
        {"d_z", ts.d_z()},
        {"eligible_positions", eligible},
        {"replaced_positions", replaced},
        {"replaced_fraction_eligible",
         eligible ? static_cast<double>(replaced) / static_cast<double>(eligible) : 0.0},
        {"protected_positions_untouched", protected_clean}};
    report["artifacts"] = {{"cache", out_cache}};
    report["timing_ms"] = sw.ms();
    write_report(report_path, report);
    return report;
}

json run_distill(const json& cfg, const std::string& teacher_path, const std::string& cache_path,
                 const std::string& out_student, const std::string& report_path) {
    StopWatch sw;
    Teacher t = load_teacher(teacher_path);
    TrajectorySet ts = read_cache(cache_path);
    Dataset ds = dataset_from(cfg);
    if (ts.meta.contains("dataset") && ts.meta.at("dataset") != cfg.at("dataset"))
        throw std::invalid_argument("distill: cache was sampled from a different dataset config");
    Tensor Xtr = ds.gather_X(ds.train_idx);
    if (!Xtr.same_shape(ts.X) || Xtr.data != ts.X.data)
        throw std::invalid_argument("distill: cache inputs disagree with the dataset");

    DistillResult dr = distill(ts, ds.gather_y(ds.train_idx), t, ds.gather_X(ds.val_idx),
                               ds.gather_y(ds.val_idx), loss_from(cfg), distill_cfg_from(cfg));

    {
        const std::filesystem::path p(out_student);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    }
    save_student(out_student, dr.student,
                 {{"time_map", ts.tmap.to_json()},
                  {"dataset", cfg.at("dataset")},
                  {"train_events", dr.events}});
    const std::string log_path = out_student + ".log.jsonl";
    {
        std::ofstream log(log_path);
        for (const auto& entry : dr.epoch_log) log << entry.dump() << "\n";
    }

    const json& eval_sec = cfg.at("eval");
    const double beta_sched = eval_sec.at("beta_sched");
    Tensor Xval = ds.gather_X(ds.val_idx);
    std::vector<int> yval = ds.gather_y(ds.val_idx);
    auto acc_at = [&](int J) {
        InferenceSchedule sched;
        sched.J = J;
        sched.beta_sched = beta_sched;
        return accuracy_from_states(t.head, infer(dr.student, Xval, sched, solver_from(cfg)).z_final,
                                    yval);
    };

    json report = base_report("distill", cfg);
    report["seed"] = cfg.at("distill").at("seed");
    report["metrics"] = {{"epochs", cfg.at("distill").at("epochs")},
                         {"val_nfe1_acc", acc_at(1)},
                         {"val_nfe5_acc", acc_at(5)},
                         {"final_epoch",
                          dr.epoch_log.empty() ? json::object() : dr.epoch_log.back()},
                         {"train_events", dr.events}};
    report["events"] = dr.events;
    report["artifacts"] = {{"student", out_student}, {"train_log", log_path}};
    report["timing_ms"] = sw.ms();
    write_report(report_path, report);
    return report;
}

json run_eval(const json& cfg, const std::string& teacher_path, const std::string& student_path,
              const std::string& report_path) {
    StopWatch sw;
    Teacher t = load_teacher(teacher_path);
    StudentParams sp = load_student(student_path);
    Dataset ds = dataset_from(cfg);
    Tensor Xval = ds.gather_X(ds.val_idx);
    std::vector<int> yval = ds.gather_y(ds.val_idx);
    const SolverConfig scfg = solver_from(cfg);
    const json& e = cfg.at("eval");
    const double beta_sched = e.at("beta_sched");
    const int J_max = e.at("J_max");
    const int K_teacher = timemap_from(cfg).K;
    std::vector<int> J_list;
    for (const auto& j : e.at("J_list")) J_list.push_back(j);

    json acc = eval_accuracy_vs_nfe(t, sp, Xval, yval, J_list, beta_sched, scfg, K_teacher);
    std::vector<double> st = student_residual_curve(t, sp, Xval, J_max, beta_sched, scfg);
    BaselineCurves base = solver_residual_curves(t, Xval, J_max, scfg);

    InferenceSchedule sched;
    sched.J = J_max;
    sched.beta_sched = beta_sched;
    StopWatch fw;
    InferenceResult probe = infer(sp, Xval, sched, scfg);
    const double per_forward_us = fw.ms() * 1000.0 / static_cast<double>(probe.nfe);

    json report = base_report("eval", cfg);
    report["seed"] = cfg.at("dataset").at("seed");
    report["metrics"] = {{"accuracy_vs_nfe", acc},
                         {"residual_student", st},
                         {"residual_aa", base.aa},
                         {"residual_picard", base.picard},
                         {"teacher_val_accuracy",
                          teacher_accuracy(t, scfg, K_teacher, Xval, yval)}};
    report["events"] = {{"ls_fallbacks", probe.ls_fallbacks}};
    report["timing_ms"] = sw.ms();
    report["wall_clock_per_forward_us"] = per_forward_us;
    write_report(report_path, report);
    return report;
}

json run_residuals(const json& cfg, const std::string& teacher_path,
                   const std::string& student_path, const std::string& csv_path,
                   const std::string& report_path) {
    StopWatch sw;
    Teacher t = load_teacher(teacher_path);
    StudentParams sp = load_student(student_path);
    Dataset ds = dataset_from(cfg);
    Tensor Xval = ds.gather_X(ds.val_idx);
    const SolverConfig scfg = solver_from(cfg);
    const json& e = cfg.at("eval");
    const int J_max = e.at("J_max");
    const double beta_sched = e.at("beta_sched");

    std::vector<double> st = student_residual_curve(t, sp, Xval, J_max, beta_sched, scfg);
    BaselineCurves base = solver_residual_curves(t, Xval, J_max, scfg);

    if (!csv_path.empty()) {
        const std::filesystem::path p(csv_path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream csv(csv_path);
        if (!csv) throw std::invalid_argument("cannot write CSV: " + csv_path);
        csv << "step,baseline_picard,baseline_aa,student\n";
        char buf[128];
        for (int j = 1; j <= J_max; ++j) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", j,
                          base.picard[static_cast<std::size_t>(j - 1)],
                          base.aa[static_cast<std::size_t>(j - 1)],
                          st[static_cast<std::size_t>(j - 1)]);
            csv << buf;
        }
    }

    json report = base_report("residuals", cfg);
    report["seed"] = cfg.at("dataset").at("seed");
    report["metrics"] = {{"residual_student", st},
                         {"residual_aa", base.aa},
                         {"residual_picard", base.picard}};
    report["artifacts"] = {{"csv", csv_path}};
    report["timing_ms"] = sw.ms();
    write_report(report_path, report);
    return report;
}

json run_ablate(const json& cfg, const std::string& teacher_path, const std::string& cache_path,
                const std::string& report_path) {
    StopWatch sw;
    Teacher t = load_teacher(teacher_path);
    TrajectorySet ts = read_cache(cache_path);
    Dataset ds = dataset_from(cfg);
    if (ts.meta.contains("dataset") && ts.meta.at("dataset") != cfg.at("dataset"))
        throw std::invalid_argument("ablate: cache was sampled from a different dataset config");
    std::vector<int> y_train = ds.gather_y(ds.train_idx);
    Tensor Xval = ds.gather_X(ds.val_idx);
    std::vector<int> yval = ds.gather_y(ds.val_idx);

    const json& a = cfg.at("ablate");
    const int epochs = a.at("epochs");
    const int eval_J = a.at("eval_J");
    const double beta_sched = a.at("beta_sched");
    LossConfig base_loss = loss_from(cfg);
    DistillConfig dc = distill_cfg_from(cfg);
    dc.epochs = epochs;
    const SolverConfig scfg = solver_from(cfg);

    json grid = json::array();
    for (const auto& l1 : a.at("lambda1_grid")) {
        for (const auto& l2 : a.at("lambda2_grid")) {
            LossConfig lc = base_loss;
            lc.lambda1 = l1;
            lc.lambda2 = l2;
            DistillResult dr = distill(ts, y_train, t, Xval, yval, lc, dc);
            auto acc_at = [&](int J) {
                InferenceSchedule sched;
                sched.J = J;
                sched.beta_sched = beta_sched;
                return accuracy_from_states(t.head,
                                            infer(dr.student, Xval, sched, scfg).z_final, yval);
            };
            grid.push_back({{"lambda1", lc.lambda1},
                            {"lambda2", lc.lambda2},
                            {"nfe1_acc", acc_at(1)},
                            {"nfe5_acc", acc_at(eval_J)}});
        }
    }

    json report = base_report("ablate-lambda", cfg);
    report["seed"] = cfg.at("distill").at("seed");
    report["metrics"] = {{"grid", grid},
                         {"epochs", epochs},
                         {"eval_J", eval_J},
                         {"teacher_val_accuracy",
                          teacher_accuracy(t, scfg, timemap_from(cfg).K, Xval, yval)}};
    report["timing_ms"] = sw.ms();
    write_report(report_path, report);
    return report;
}

}  // namespace cdeq
