#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "cdeq/errors.hpp"
#include "cdeq/harness.hpp"

namespace {

cdeq::json config_for(const std::string& path) {
    return path.empty() ? cdeq::default_config() : cdeq::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium teacher, trajectory cache, consistency student, evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "artifacts";
    std::uint64_t seed = 0;
    std::string teacher_path, cache_path, student_path, csv_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path,
                        "JSON config file; defaults apply when omitted");
        sub->add_option("--seed", seed, "override the stage's primary seed");
        sub->add_option("--out", out_dir, "artifact directory")->capture_default_str();
    };

    CLI::App* train = app.add_subcommand("train-teacher", "train the equilibrium teacher");
    add_common(train);
    CLI::App* sample = app.add_subcommand("sample-traj", "cache accelerated solver trajectories");
    add_common(sample);
    sample->add_option("--teacher", teacher_path, "teacher checkpoint");
    CLI::App* dist = app.add_subcommand("distill", "distill the consistency student");
    add_common(dist);
    dist->add_option("--teacher", teacher_path, "teacher checkpoint");
    dist->add_option("--cache", cache_path, "trajectory cache");
    CLI::App* ev = app.add_subcommand("eval", "accuracy vs NFE plus residual curves");
    add_common(ev);
    ev->add_option("--teacher", teacher_path, "teacher checkpoint");
    ev->add_option("--student", student_path, "student checkpoint");
    CLI::App* res = app.add_subcommand("residuals", "residual curves, CSV output");
    add_common(res);
    res->add_option("--teacher", teacher_path, "teacher checkpoint");
    res->add_option("--student", student_path, "student checkpoint");
    res->add_option("--csv", csv_path, "output CSV path");
    CLI::App* abl = app.add_subcommand("ablate-lambda", "loss-weight grid ablation");
    add_common(abl);
    abl->add_option("--teacher", teacher_path, "teacher checkpoint");
    abl->add_option("--cache", cache_path, "trajectory cache");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        cdeq::json cfg = config_for(config_path);
        auto dpath = [&](const std::string& name) { return out_dir + "/" + name; };
        if (teacher_path.empty()) teacher_path = dpath("teacher.bin");
        if (cache_path.empty()) cache_path = dpath("trajectories.bin");
        if (student_path.empty()) student_path = dpath("student.bin");
        if (csv_path.empty()) csv_path = dpath("residuals.csv");

        cdeq::json report;
        if (app.got_subcommand(train)) {
            if (train->count("--seed")) cfg["teacher"]["seed"] = seed;
            report = cdeq::run_train_teacher(cfg, dpath("teacher.bin"),
                                             dpath("report_train_teacher.json"));
        } else if (app.got_subcommand(sample)) {
            if (sample->count("--seed")) cfg["sample"]["seed"] = seed;
            report = cdeq::run_sample_traj(cfg, teacher_path, dpath("trajectories.bin"),
                                           dpath("report_sample_traj.json"));
        } else if (app.got_subcommand(dist)) {
            if (dist->count("--seed")) cfg["distill"]["seed"] = seed;
            report = cdeq::run_distill(cfg, teacher_path, cache_path, dpath("student.bin"),
                                       dpath("report_distill.json"));
        } else if (app.got_subcommand(ev)) {
            if (ev->count("--seed")) cfg["dataset"]["seed"] = seed;
            report = cdeq::run_eval(cfg, teacher_path, student_path, dpath("report_eval.json"));
        } else if (app.got_subcommand(res)) {
            if (res->count("--seed")) cfg["dataset"]["seed"] = seed;
            report = cdeq::run_residuals(cfg, teacher_path, student_path, csv_path,
                                         dpath("report_residuals.json"));
        } else if (app.got_subcommand(abl)) {
            if (abl->count("--seed")) cfg["distill"]["seed"] = seed;
            report = cdeq::run_ablate(cfg, teacher_path, cache_path,
                                      dpath("report_ablate_lambda.json"));
        }
        std::cout << report.dump(2) << "\n";
        return 0;
    } catch (const cdeq::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
