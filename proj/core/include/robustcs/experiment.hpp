#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "robustcs/imaging.hpp"
#include "robustcs/io.hpp"
#include "robustcs/regpath.hpp"
#include "robustcs/sensing.hpp"
#include "robustcs/solvers.hpp"

namespace robustcs {

// Full description of a study: instance geometry, noise, solver list, solver
// and path options, output location. Every field maps to one config-file key
// and one CLI flag of the same name.
struct ExperimentConfig {
  // Instance.
  int size = 32;
  int bars = 8;
  int frames = 1;
  int block_size = 6;
  double m_ratio = 0.4;
  bool orthogonal_phi = false;
  std::uint64_t seed = 1;
  std::uint64_t seed_image = 0;  // 0 -> derived from seed
  std::uint64_t seed_matrix = 0;
  std::uint64_t seed_noise = 0;

  // Noise.
  std::string noise = "gmm";  // gmm | gaussian | cauchy | none
  double snr_db = 20.0;
  double contamination = 0.1;
  double kappa = 100.0;
  double cauchy_scale = 0.05;  // fraction of the clean measurement RMS

  // Solver selection and options.
  std::vector<std::string> solvers = {"cs", "admm"};
  std::string solver = "admm";  // single-solver subcommands
  double eta = 2.0;
  double eta2 = 2.0;
  double mu = 1.0;
  double beta = 0.0;
  int max_iter = 5000;
  double abs_tol = 1e-4;
  double rel_tol = 1e-2;

  // Huber scale policy: "noise" uses the generator's base sigma, "mad" the
  // MAD of the measurements, "value" the explicit huber_nu.
  std::string scale_mode = "noise";
  double huber_tuning = 1.345;
  double huber_nu = 0.0;

  // Regularization path.
  int grid_points = 20;
  double decades = 4.0;
  double bisect_rel_width = 1e-2;
  std::string epsilon_mode = "auto";  // auto | value
  double epsilon = 0.0;
  double lambda = 0.0;  // fixed lambda for the solve subcommand

  std::string out_dir = "out";

  void validate() const;
  io::KeyValues to_key_values() const;
  static ExperimentConfig from_key_values(const io::KeyValues& kv);

  std::uint64_t image_seed() const;
  std::uint64_t matrix_seed() const;
  std::uint64_t noise_seed() const;
};

// Generated study data. Columns of the matrices index frames/tasks.
struct DeskInstance {
  std::vector<ImageFrame> frames;
  Eigen::MatrixXd x_true;   // N x T wavelet coefficients
  Eigen::MatrixXd phi;      // M x N
  Eigen::MatrixXd y_clean;  // M x T
  Eigen::MatrixXd y;        // M x T
  Eigen::MatrixXd noise;    // y - y_clean
  bool noiseless = false;
  int size = 0;

  Eigen::Index n() const { return phi.cols(); }
  Eigen::Index m() const { return phi.rows(); }
  Eigen::Index tasks() const { return y.cols(); }
};
DeskInstance generate_instance(const ExperimentConfig& cfg);

// Resolved meaning of a solver name. Known names: cs, cs-fista, fista, admm,
// nested, affine, l1, mt-fista, mt-admm.
struct SolverPlan {
  std::string name;
  bool multitask = false;
  bool robust = true;  // false -> quadratic loss (plain CS)
  SolverChoice choice = SolverChoice::Admm;
  Engine engine = Engine::Admm;
  ResidualCriterion criterion = ResidualCriterion::Huber;
};
SolverPlan resolve_solver(const std::string& name);

// Huber parameters under the configured scale policy. frame < 0 averages the
// per-frame noise scales (multitask).
HuberParams huber_params_for(const ExperimentConfig& cfg, const DeskInstance& inst,
                             int frame, const SolverPlan& plan);

// Residual budget under the configured policy. Gaussian-family noise uses the
// closed-form mixture expectation; Cauchy uses the criterion value of the
// generated noise realization (no finite moments); noiseless data gets a tiny
// floor. frame < 0 sums the per-frame budgets.
double epsilon_for(const ExperimentConfig& cfg, const DeskInstance& inst, int frame,
                   const SolverPlan& plan, const HuberParams& params);

struct FrameRun {
  double lambda = 0.0;
  double psnr_db = 0.0;
  double criterion = 0.0;
  double epsilon = 0.0;
  PathStatus path_status = PathStatus::NotMet;
  HuberParams params = HuberParams::quadratic();
  Solution solution;
  std::vector<PathRecord> path_records;
  double seconds = 0.0;
};
FrameRun run_single_task(const DeskInstance& inst, int frame, const SolverPlan& plan,
                         const ExperimentConfig& cfg);

struct MultiRun {
  double lambda = 0.0;
  std::vector<double> psnr_db;
  double criterion = 0.0;
  double epsilon = 0.0;
  PathStatus path_status = PathStatus::NotMet;
  MultiTaskSolution solution;
  std::vector<PathRecord> path_records;
  double seconds = 0.0;
};
MultiRun run_multi_task(const DeskInstance& inst, const SolverPlan& plan,
                        const ExperimentConfig& cfg);

struct SolverFrameResult {
  std::string solver;
  int frame = 0;
  double lambda = 0.0;
  double psnr_db = 0.0;
  long long iterations = 0;
  std::string status;
  double criterion = 0.0;
  double epsilon = 0.0;
  double seconds = 0.0;
};
struct ExperimentResult {
  std::vector<SolverFrameResult> rows;
  std::filesystem::path out_dir;
};

// Generates the instance, runs every selected solver through path selection,
// and writes recovered images, convergence and path CSVs, a PSNR summary, and
// a manifest (written last; its presence marks a complete run).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes the generated instance artifacts (frames, sensing matrix,
// measurements, coefficients) plus a manifest to cfg.out_dir.
void write_instance_artifacts(const ExperimentConfig& cfg);

// PSNR tables across prior experiment runs. Each assertion demands that the
// median over runs of mean-over-frames PSNR(a) - PSNR(b) is at least
// min_gain_db; any miss makes the return value false.
struct CompareAssertion {
  std::string solver_a;
  std::string solver_b;
  double min_gain_db = 0.0;
};
bool compare_runs(const std::vector<std::filesystem::path>& run_dirs,
                  const std::vector<CompareAssertion>& assertions,
                  std::ostream& report);

}  // namespace robustcs
