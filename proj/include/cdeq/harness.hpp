#pragma once
#include <string>
#include <vector>

#include "cdeq/backbone.hpp"
#include "cdeq/consistency.hpp"
#include "cdeq/dataset.hpp"
#include "cdeq/distill.hpp"
#include "cdeq/serialize.hpp"
#include "cdeq/solver.hpp"
#include "cdeq/trajectory.hpp"

namespace cdeq {

// House defaults for every section; user files override key-by-key. Unknown
// sections, unknown keys, or wrongly typed values are validation errors.
json default_config();
json merge_validated(const json& user);
json load_config(const std::string& path);
void validate_config(const json& cfg);

SolverConfig solver_from(const json& cfg);
TimeMap timemap_from(const json& cfg);
AugmentConfig augment_from(const json& cfg);
LossConfig loss_from(const json& cfg);
DistillConfig distill_cfg_from(const json& cfg);
TeacherTrainConfig teacher_cfg_from(const json& cfg);
Dataset dataset_from(const json& cfg);

// Mean over rows of ||f_theta(z_i, x_i) - z_i|| / ||z_i||. Residuals are
// always taken against the teacher map, student states included; a zero-norm
// state is an error.
double mean_rel_residual(const BackboneParams& fb, const Tensor& Z, const Tensor& X);

struct BaselineCurves {
    std::vector<double> aa, picard;  // index j-1 holds the step-j residual
};
BaselineCurves solver_residual_curves(const Teacher& t, const Tensor& X, int J_max,
                                      const SolverConfig& cfg);
std::vector<double> student_residual_curve(const Teacher& t, const StudentParams& sp,
                                           const Tensor& X, int J_max, double beta_sched,
                                           const SolverConfig& cfg);

double accuracy_from_states(const ReadoutHead& head, const Tensor& Z, const std::vector<int>& y);
// One row per J: {J, nfe, accuracy}; teacher AA at K iterations appended as
// the reference column.
json eval_accuracy_vs_nfe(const Teacher& t, const StudentParams& sp, const Tensor& X,
                          const std::vector<int>& y, const std::vector<int>& J_list,
                          double beta_sched, const SolverConfig& cfg, int K_teacher);

// Subcommand drivers, shared by the CLI and the acceptance binary. Each
// returns the report it wrote; pass an empty report_path to skip the file.
json run_train_teacher(const json& cfg, const std::string& out_teacher,
                       const std::string& report_path);
json run_sample_traj(const json& cfg, const std::string& teacher_path,
                     const std::string& out_cache, const std::string& report_path);
json run_distill(const json& cfg, const std::string& teacher_path, const std::string& cache_path,
                 const std::string& out_student, const std::string& report_path);
json run_eval(const json& cfg, const std::string& teacher_path, const std::string& student_path,
              const std::string& report_path);
json run_residuals(const json& cfg, const std::string& teacher_path,
                   const std::string& student_path, const std::string& csv_path,
                   const std::string& report_path);
json run_ablate(const json& cfg, const std::string& teacher_path, const std::string& cache_path,
                const std::string& report_path);

}  // namespace cdeq
