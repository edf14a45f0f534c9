#include "robustcs/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "robustcs/random.hpp"
#include "robustcs/wavelet.hpp"

namespace robustcs {

namespace fs = std::filesystem;

namespace {

void config_require(bool cond, const std::string& msg) {
  if (!cond) throw io::ConfigError(msg);
}

double parse_double_value(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  config_require(res.ec == std::errc() && res.ptr == value.data() + value.size(),
                 "config: bad number for '" + key + "': " + value);
  return v;
}

long long parse_int_value(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  config_require(res.ec == std::errc() && res.ptr == value.data() + value.size(),
                 "config: bad integer for '" + key + "': " + value);
  return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  config_require(res.ec == std::errc() && res.ptr == value.data() + value.size(),
                 "config: bad seed for '" + key + "': " + value);
  return v;
}

bool parse_bool_value(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw io::ConfigError("config: bad boolean for '" + key + "': " + value);
}

std::vector<std::string> parse_list_value(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    out.push_back(item.substr(begin, end - begin + 1));
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

double now_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

NoiseSpec resolved_noise_spec(const ExperimentConfig& cfg, const Eigen::VectorXd& clean) {
  if (cfg.noise == "gmm") {
    return GaussianMixtureNoise{cfg.snr_db, cfg.contamination, cfg.kappa};
  }
  if (cfg.noise == "gaussian") {
    return GaussianNoise{cfg.snr_db};
  }
  if (cfg.noise == "cauchy") {
    const double rms = std::sqrt(clean.squaredNorm() / static_cast<double>(clean.size()));
    return CauchyNoise{std::max(cfg.cauchy_scale * rms, 1e-300)};
  }
  throw io::ConfigError("config: unknown noise kind: " + cfg.noise);
}

std::string status_string(SolveStatus s) {
  return s == SolveStatus::Converged ? "converged" : "max-iterations";
}

void write_trace_csv(const fs::path& path, const SolverTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const std::vector<std::string> header = {"iter",
                                           "objective",
                                           "primal_residual",
                                           "dual_residual",
                                           "primal_residual2",
                                           "dual_residual2",
                                           "inner_iterations",
                                           "seconds"};
  io::write_csv_row(out, header);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    const std::vector<std::string> row = {
        std::to_string(i + 1),
        io::format_double(r.objective),
        io::format_double(r.primal_residual),
        io::format_double(r.dual_residual),
        io::format_double(r.primal_residual2),
        io::format_double(r.dual_residual2),
        std::to_string(r.inner_iterations),
        io::format_double(r.seconds)};
    io::write_csv_row(out, row);
  }
}

void write_path_csv(const fs::path& path, const std::vector<PathRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const std::vector<std::string> header = {"lambda", "criterion", "l1_norm",
                                           "nnz",    "iterations", "seconds"};
  io::write_csv_row(out, header);
  for (const auto& r : records) {
    const std::vector<std::string> row = {
        io::format_double(r.lambda),   io::format_double(r.criterion),
        io::format_double(r.l1_norm),  std::to_string(r.nnz),
        std::to_string(r.iterations),  io::format_double(r.seconds)};
    io::write_csv_row(out, row);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  config_require(size >= 8 && (size & (size - 1)) == 0,
                 "config: size must be a power of two >= 8");
  config_require(bars >= 0, "config: bars must be nonnegative");
  config_require(frames >= 1, "config: frames must be at least 1");
  config_require(block_size >= 0 && block_size < size, "config: bad block_size");
  config_require(m_ratio > 0.0 && m_ratio <= 4.0, "config: m_ratio out of range");
  config_require(noise == "gmm" || noise == "gaussian" || noise == "cauchy" ||
                     noise == "none",
                 "config: noise must be gmm|gaussian|cauchy|none");
  config_require(contamination >= 0.0 && contamination < 1.0,
                 "config: contamination must lie in [0, 1)");
  config_require(kappa >= 1.0, "config: kappa must be at least 1");
  config_require(cauchy_scale > 0.0, "config: cauchy_scale must be positive");
  config_require(!solvers.empty(), "config: at least one solver required");
  for (const auto& name : solvers) resolve_solver(name);
  resolve_solver(solver);
  config_require(scale_mode == "noise" || scale_mode == "mad" || scale_mode == "value",
                 "config: scale_mode must be noise|mad|value");
  config_require(scale_mode != "value" || huber_nu > 0.0,
                 "config: scale_mode=value needs huber_nu > 0");
  config_require(huber_tuning > 0.0, "config: huber_tuning must be positive");
  config_require(epsilon_mode == "auto" || epsilon_mode == "value",
                 "config: epsilon_mode must be auto|value");
  config_require(epsilon_mode != "value" || epsilon > 0.0,
                 "config: epsilon_mode=value needs epsilon > 0");
  config_require(grid_points >= 2, "config: grid_points must be at least 2");
  config_require(decades > 0.0, "config: decades must be positive");
  config_require(bisect_rel_width > 0.0, "config: bisect_rel_width must be positive");
  config_require(max_iter >= 1, "config: max_iter must be at least 1");
  config_require(abs_tol > 0.0 && rel_tol > 0.0, "config: tolerances must be positive");
  config_require(eta > 0.0 && eta2 > 0.0 && mu > 0.0 && beta >= 0.0,
                 "config: bad penalty parameters");
  config_require(!out_dir.empty(), "config: out_dir must not be empty");
}

std::uint64_t ExperimentConfig::image_seed() const {
  return seed_image != 0 ? seed_image : mix_seed(seed, 1);
}
std::uint64_t ExperimentConfig::matrix_seed() const {
  return seed_matrix != 0 ? seed_matrix : mix_seed(seed, 2);
}
std::uint64_t ExperimentConfig::noise_seed() const {
  return seed_noise != 0 ? seed_noise : mix_seed(seed, 3);
}

io::KeyValues ExperimentConfig::to_key_values() const {
  io::KeyValues kv;
  kv.emplace_back("size", std::to_string(size));
  kv.emplace_back("bars", std::to_string(bars));
  kv.emplace_back("frames", std::to_string(frames));
  kv.emplace_back("block_size", std::to_string(block_size));
  kv.emplace_back("m_ratio", io::format_double(m_ratio));
  kv.emplace_back("orthogonal_phi", orthogonal_phi ? "true" : "false");
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("seed_image", std::to_string(seed_image));
  kv.emplace_back("seed_matrix", std::to_string(seed_matrix));
  kv.emplace_back("seed_noise", std::to_string(seed_noise));
  kv.emplace_back("noise", noise);
  kv.emplace_back("snr_db", io::format_double(snr_db));
  kv.emplace_back("contamination", io::format_double(contamination));
  kv.emplace_back("kappa", io::format_double(kappa));
  kv.emplace_back("cauchy_scale", io::format_double(cauchy_scale));
  kv.emplace_back("solvers", join_list(solvers));
  kv.emplace_back("solver", solver);
  kv.emplace_back("eta", io::format_double(eta));
  kv.emplace_back("eta2", io::format_double(eta2));
  kv.emplace_back("mu", io::format_double(mu));
  kv.emplace_back("beta", io::format_double(beta));
  kv.emplace_back("max_iter", std::to_string(max_iter));
  kv.emplace_back("abs_tol", io::format_double(abs_tol));
  kv.emplace_back("rel_tol", io::format_double(rel_tol));
  kv.emplace_back("scale_mode", scale_mode);
  kv.emplace_back("huber_tuning", io::format_double(huber_tuning));
  kv.emplace_back("huber_nu", io::format_double(huber_nu));
  kv.emplace_back("grid_points", std::to_string(grid_points));
  kv.emplace_back("decades", io::format_double(decades));
  kv.emplace_back("bisect_rel_width", io::format_double(bisect_rel_width));
  kv.emplace_back("epsilon_mode", epsilon_mode);
  kv.emplace_back("epsilon", io::format_double(epsilon));
  kv.emplace_back("lambda", io::format_double(lambda));
  kv.emplace_back("out_dir", out_dir);
  return kv;
}

ExperimentConfig ExperimentConfig::from_key_values(const io::KeyValues& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "size") cfg.size = static_cast<int>(parse_int_value(key, value));
    else if (key == "bars") cfg.bars = static_cast<int>(parse_int_value(key, value));
    else if (key == "frames") cfg.frames = static_cast<int>(parse_int_value(key, value));
    else if (key == "block_size") cfg.block_size = static_cast<int>(parse_int_value(key, value));
    else if (key == "m_ratio") cfg.m_ratio = parse_double_value(key, value);
    else if (key == "orthogonal_phi") cfg.orthogonal_phi = parse_bool_value(key, value);
    else if (key == "seed") cfg.seed = parse_u64_value(key, value);
    else if (key == "seed_image") cfg.seed_image = parse_u64_value(key, value);
    else if (key == "seed_matrix") cfg.seed_matrix = parse_u64_value(key, value);
    else if (key == "seed_noise") cfg.seed_noise = parse_u64_value(key, value);
    else if (key == "noise") cfg.noise = value;
    else if (key == "snr_db") cfg.snr_db = parse_double_value(key, value);
    else if (key == "contamination") cfg.contamination = parse_double_value(key, value);
    else if (key == "kappa") cfg.kappa = parse_double_value(key, value);
    else if (key == "cauchy_scale") cfg.cauchy_scale = parse_double_value(key, value);
    else if (key == "solvers") cfg.solvers = parse_list_value(value);
    else if (key == "solver") cfg.solver = value;
    else if (key == "eta") cfg.eta = parse_double_value(key, value);
    else if (key == "eta2") cfg.eta2 = parse_double_value(key, value);
    else if (key == "mu") cfg.mu = parse_double_value(key, value);
    else if (key == "beta") cfg.beta = parse_double_value(key, value);
    else if (key == "max_iter") cfg.max_iter = static_cast<int>(parse_int_value(key, value));
    else if (key == "abs_tol") cfg.abs_tol = parse_double_value(key, value);
    else if (key == "rel_tol") cfg.rel_tol = parse_double_value(key, value);
    else if (key == "scale_mode") cfg.scale_mode = value;
    else if (key == "huber_tuning") cfg.huber_tuning = parse_double_value(key, value);
    else if (key == "huber_nu") cfg.huber_nu = parse_double_value(key, value);
    else if (key == "grid_points") cfg.grid_points = static_cast<int>(parse_int_value(key, value));
    else if (key == "decades") cfg.decades = parse_double_value(key, value);
    else if (key == "bisect_rel_width") cfg.bisect_rel_width = parse_double_value(key, value);
    else if (key == "epsilon_mode") cfg.epsilon_mode = value;
    else if (key == "epsilon") cfg.epsilon = parse_double_value(key, value);
    else if (key == "lambda") cfg.lambda = parse_double_value(key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else throw io::ConfigError("config: unknown key '" + key + "'");
  }
  return cfg;
}

DeskInstance generate_instance(const ExperimentConfig& cfg) {
  cfg.validate();
  DeskInstance inst;
  inst.size = cfg.size;
  inst.noiseless = cfg.noise == "none";

  if (cfg.frames == 1) {
    inst.frames.push_back(gen_random_bars(cfg.size, cfg.bars, cfg.image_seed()));
  } else {
    inst.frames = gen_bar_sequence(cfg.size, cfg.bars, cfg.frames, cfg.block_size,
                                   cfg.image_seed());
  }

  const Eigen::Index n = static_cast<Eigen::Index>(cfg.size) * cfg.size;
  const Eigen::Index m =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(cfg.m_ratio * n)));
  const Eigen::Index tasks = static_cast<Eigen::Index>(inst.frames.size());

  inst.x_true.resize(n, tasks);
  for (Eigen::Index t = 0; t < tasks; ++t) {
    inst.x_true.col(t) = haar2d(inst.frames[static_cast<std::size_t>(t)]);
  }
  inst.phi = gen_sensing_matrix(m, n, cfg.matrix_seed(), cfg.orthogonal_phi);
  inst.y_clean = inst.phi * inst.x_true;

  inst.y = inst.y_clean;
  if (!inst.noiseless) {
    for (Eigen::Index t = 0; t < tasks; ++t) {
      const NoiseSpec spec = resolved_noise_spec(cfg, inst.y_clean.col(t));
      inst.y.col(t) = apply_noise(inst.y_clean.col(t), spec,
                                  mix_seed(cfg.noise_seed(), static_cast<std::uint64_t>(t)));
    }
  }
  inst.noise = inst.y - inst.y_clean;
  return inst;
}

SolverPlan resolve_solver(const std::string& name) {
  SolverPlan plan;
  plan.name = name;
  if (name == "cs") {
    plan.robust = false;
    plan.choice = SolverChoice::Admm;
    plan.criterion = ResidualCriterion::L2;
  } else if (name == "cs-fista") {
    plan.robust = false;
    plan.choice = SolverChoice::Fista;
    plan.criterion = ResidualCriterion::L2;
  } else if (name == "fista") {
    plan.choice = SolverChoice::Fista;
  } else if (name == "admm") {
    plan.choice = SolverChoice::Admm;
  } else if (name == "nested") {
    plan.choice = SolverChoice::Nested;
  } else if (name == "affine") {
    plan.choice = SolverChoice::Affine;
  } else if (name == "l1") {
    plan.choice = SolverChoice::L1Loss;
    plan.criterion = ResidualCriterion::L1;
  } else if (name == "mt-admm") {
    plan.multitask = true;
    plan.engine = Engine::Admm;
  } else if (name == "mt-fista") {
    plan.multitask = true;
    plan.engine = Engine::Fista;
  } else {
    throw io::ConfigError("unknown solver name: " + name);
  }
  return plan;
}

HuberParams huber_params_for(const ExperimentConfig& cfg, const DeskInstance& inst,
                             int frame, const SolverPlan& plan) {
  if (!plan.robust) return HuberParams::quadratic();

  double nu = 0.0;
  if (cfg.scale_mode == "value") {
    nu = cfg.huber_nu;
  } else if (cfg.scale_mode == "noise" && !inst.noiseless) {
    if (frame >= 0) {
      nu = noise_base_sigma(inst.y_clean.col(frame),
                            resolved_noise_spec(cfg, inst.y_clean.col(frame)));
    } else {
      for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
        nu += noise_base_sigma(inst.y_clean.col(t),
                               resolved_noise_spec(cfg, inst.y_clean.col(t)));
      }
      nu /= static_cast<double>(inst.tasks());
    }
  } else {
    // MAD of the measurements themselves (also the noiseless fallback).
    if (frame >= 0) {
      nu = estimate_scale_mad(inst.y.col(frame));
    } else {
      const Eigen::Map<const Eigen::VectorXd> all(inst.y.data(), inst.y.size());
      nu = estimate_scale_mad(all);
    }
  }
  return HuberParams::from_scale(std::max(nu, 1e-12), cfg.huber_tuning);
}

namespace {

// Closed-form expected criterion of the two-component mixture.
double mixture_epsilon(const HuberParams& params, Eigen::Index m, double sigma,
                       double p, double kappa, ResidualCriterion kind) {
  const double clean_part = (1.0 - p) * estimate_epsilon(params, m, sigma, kind);
  if (p <= 0.0) return clean_part;
  return clean_part + p * estimate_epsilon(params, m, sigma * std::sqrt(kappa), kind);
}

double frame_epsilon(const ExperimentConfig& cfg, const DeskInstance& inst, int frame,
                     const SolverPlan& plan, const HuberParams& params) {
  const Eigen::Index m = inst.m();
  if (inst.noiseless) {
    return 1e-12 * static_cast<double>(m);
  }
  if (cfg.noise == "cauchy") {
    // Heavy tails: no finite moments, so budget the realized noise level.
    return criterion_value(inst.noise.col(frame), params, plan.criterion);
  }
  const double p = cfg.noise == "gmm" ? cfg.contamination : 0.0;
  const double kappa = cfg.noise == "gmm" ? cfg.kappa : 1.0;
  const double sigma = noise_base_sigma(inst.y_clean.col(frame),
                                        resolved_noise_spec(cfg, inst.y_clean.col(frame)));
  return mixture_epsilon(params, m, sigma, p, kappa, plan.criterion);
}

}  // namespace

double epsilon_for(const ExperimentConfig& cfg, const DeskInstance& inst, int frame,
                   const SolverPlan& plan, const HuberParams& params) {
  if (cfg.epsilon_mode == "value") {
    return frame >= 0 ? cfg.epsilon : cfg.epsilon * static_cast<double>(inst.tasks());
  }
  if (frame >= 0) return frame_epsilon(cfg, inst, frame, plan, params);
  double total = 0.0;
  for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
    total += frame_epsilon(cfg, inst, static_cast<int>(t), plan, params);
  }
  return total;
}

namespace {

SolverOptions solver_options_from(const ExperimentConfig& cfg) {
  SolverOptions opts;
  opts.eta = cfg.eta;
  opts.eta2 = cfg.eta2;
  opts.mu = cfg.mu;
  opts.beta = cfg.beta;
  opts.max_iter = cfg.max_iter;
  opts.abs_tol = cfg.abs_tol;
  opts.rel_tol = cfg.rel_tol;
  return opts;
}

PathConfig path_config_from(const ExperimentConfig& cfg, double epsilon,
                            ResidualCriterion criterion) {
  PathConfig pc;
  pc.grid_points = cfg.grid_points;
  pc.decades = cfg.decades;
  pc.bisect_rel_width = cfg.bisect_rel_width;
  pc.epsilon = epsilon;
  pc.criterion = criterion;
  return pc;
}

}  // namespace

FrameRun run_single_task(const DeskInstance& inst, int frame, const SolverPlan& plan,
                         const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const SensingProblem prob(inst.phi, inst.y.col(frame));

  FrameRun run;
  run.params = huber_params_for(cfg, inst, frame, plan);
  run.epsilon = epsilon_for(cfg, inst, frame, plan, run.params);

  const PathConfig pc = path_config_from(cfg, run.epsilon, plan.criterion);
  const SolverOptions opts = solver_options_from(cfg);

  Eigen::VectorXd affine_c;
  const Eigen::VectorXd* affine_ptr = nullptr;
  if (plan.choice == SolverChoice::Affine) {
    affine_c = power_constraint_vector(inst.x_true.col(frame).sum(), inst.n());
    affine_ptr = &affine_c;
  }

  PathResult path = select_lambda(prob, run.params, plan.choice, pc, opts, affine_ptr);
  run.lambda = path.lambda_star;
  run.path_status = path.status;
  run.criterion = criterion_value(inst.y.col(frame) - inst.phi * path.solution.x,
                                  run.params, plan.criterion);
  run.psnr_db = psnr(inst.frames[static_cast<std::size_t>(frame)],
                     ihaar2d(path.solution.x, inst.size, inst.size));
  run.solution = std::move(path.solution);
  run.path_records = std::move(path.records);
  run.seconds = now_seconds(start);
  return run;
}

MultiRun run_multi_task(const DeskInstance& inst, const SolverPlan& plan,
                        const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const MultiTaskProblem prob(inst.phi, inst.y);

  MultiRun run;
  const HuberParams params = huber_params_for(cfg, inst, -1, plan);
  run.epsilon = epsilon_for(cfg, inst, -1, plan, params);

  const PathConfig pc = path_config_from(cfg, run.epsilon, plan.criterion);
  const SolverOptions opts = solver_options_from(cfg);

  MultiTaskPathResult path =
      select_lambda_multitask(prob, params, plan.engine, pc, opts);
  run.lambda = path.lambda_star;
  run.path_status = path.status;
  run.criterion = 0.0;
  for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
    run.criterion += criterion_value(
        inst.y.col(t) - inst.phi * path.solution.x.col(t), params, plan.criterion);
    run.psnr_db.push_back(psnr(inst.frames[static_cast<std::size_t>(t)],
                               ihaar2d(path.solution.x.col(t), inst.size, inst.size)));
  }
  run.solution = std::move(path.solution);
  run.path_records = std::move(path.records);
  run.seconds = now_seconds(start);
  return run;
}

namespace {

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                    std::vector<std::string> artifacts) {
  io::KeyValues kv = cfg.to_key_values();
  kv.emplace_back("resolved_seed_image", std::to_string(cfg.image_seed()));
  kv.emplace_back("resolved_seed_matrix", std::to_string(cfg.matrix_seed()));
  kv.emplace_back("resolved_seed_noise", std::to_string(cfg.noise_seed()));
  std::sort(artifacts.begin(), artifacts.end());
  for (const auto& name : artifacts) {
    std::ostringstream hex;
    hex << std::hex << io::fnv1a64_file(dir / name);
    kv.emplace_back("checksum." + name, hex.str());
  }
  io::write_key_values(dir / "manifest.txt", kv);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir.string());

  const DeskInstance inst = generate_instance(cfg);

  ExperimentResult result;
  result.out_dir = dir;
  std::vector<std::string> artifacts;

  for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
    const std::string name = "original_f" + std::to_string(t) + ".pgm";
    io::write_pgm(dir / name, inst.frames[static_cast<std::size_t>(t)]);
    artifacts.push_back(name);
  }

  for (const auto& solver_name : cfg.solvers) {
    const SolverPlan plan = resolve_solver(solver_name);
    if (plan.multitask) {
      const MultiRun run = run_multi_task(inst, plan, cfg);
      for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
        const std::string name =
            "recovered_" + plan.name + "_f" + std::to_string(t) + ".pgm";
        io::write_pgm(dir / name, ihaar2d(run.solution.x.col(t), inst.size, inst.size));
        artifacts.push_back(name);
        result.rows.push_back({plan.name, static_cast<int>(t), run.lambda,
                               run.psnr_db[static_cast<std::size_t>(t)],
                               static_cast<long long>(run.solution.trace.size()),
                               status_string(run.solution.status), run.criterion,
                               run.epsilon, run.seconds});
      }
      const std::string conv = "convergence_" + plan.name + ".csv";
      write_trace_csv(dir / conv, run.solution.trace);
      artifacts.push_back(conv);
      const std::string pathcsv = "path_" + plan.name + ".csv";
      write_path_csv(dir / pathcsv, run.path_records);
      artifacts.push_back(pathcsv);
    } else {
      for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
        const FrameRun run = run_single_task(inst, static_cast<int>(t), plan, cfg);
        const std::string suffix = plan.name + "_f" + std::to_string(t);
        const std::string name = "recovered_" + suffix + ".pgm";
        io::write_pgm(dir / name, ihaar2d(run.solution.x, inst.size, inst.size));
        artifacts.push_back(name);
        const std::string conv = "convergence_" + suffix + ".csv";
        write_trace_csv(dir / conv, run.solution.trace);
        artifacts.push_back(conv);
        const std::string pathcsv = "path_" + suffix + ".csv";
        write_path_csv(dir / pathcsv, run.path_records);
        artifacts.push_back(pathcsv);
        result.rows.push_back({plan.name, static_cast<int>(t), run.lambda, run.psnr_db,
                               run.solution.total_iterations(),
                               status_string(run.solution.status), run.criterion,
                               run.epsilon, run.seconds});
      }
    }
  }

  {
    std::ofstream out(dir / "psnr_summary.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write psnr_summary.csv");
    const std::vector<std::string> header = {"solver",    "frame",  "lambda",
                                             "psnr_db",   "iterations", "status",
                                             "criterion", "epsilon",    "seconds"};
    io::write_csv_row(out, header);
    for (const auto& row : result.rows) {
      const std::vector<std::string> fields = {
          row.solver,
          std::to_string(row.frame),
          io::format_double(row.lambda),
          io::format_double(row.psnr_db),
          std::to_string(row.iterations),
          row.status,
          io::format_double(row.criterion),
          io::format_double(row.epsilon),
          io::format_double(row.seconds)};
      io::write_csv_row(out, fields);
    }
    artifacts.push_back("psnr_summary.csv");
  }

  write_manifest(dir, cfg, std::move(artifacts));
  return result;
}

void write_instance_artifacts(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir.string());

  const DeskInstance inst = generate_instance(cfg);
  std::vector<std::string> artifacts;
  for (Eigen::Index t = 0; t < inst.tasks(); ++t) {
    const std::string name = "original_f" + std::to_string(t) + ".pgm";
    io::write_pgm(dir / name, inst.frames[static_cast<std::size_t>(t)]);
    artifacts.push_back(name);
  }
  io::write_matrix_csv(dir / "phi.csv", inst.phi);
  artifacts.push_back("phi.csv");
  io::write_matrix_csv(dir / "x_true.csv", inst.x_true);
  artifacts.push_back("x_true.csv");
  io::write_matrix_csv(dir / "y_clean.csv", inst.y_clean);
  artifacts.push_back("y_clean.csv");
  io::write_matrix_csv(dir / "y.csv", inst.y);
  artifacts.push_back("y.csv");
  write_manifest(dir, cfg, std::move(artifacts));
}

bool compare_runs(const std::vector<fs::path>& run_dirs,
                  const std::vector<CompareAssertion>& assertions,
                  std::ostream& report) {
  // per run dir: solver -> mean PSNR over frames
  std::vector<std::map<std::string, double>> runs;
  std::set<std::string> solver_names;
  for (const auto& dir : run_dirs) {
    std::ifstream in(dir / "psnr_summary.csv");
    if (!in) throw std::runtime_error("missing psnr_summary.csv in " + dir.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty summary in " + dir.string());
    std::map<std::string, std::pair<double, int>> acc;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto fields = io::parse_csv_row(line);
      if (fields.size() < 4) continue;
      acc[fields[0]].first += std::stod(fields[3]);
      acc[fields[0]].second += 1;
    }
    std::map<std::string, double> means;
    for (const auto& [name, sum_count] : acc) {
      means[name] = sum_count.first / sum_count.second;
      solver_names.insert(name);
    }
    runs.push_back(std::move(means));
  }

  report << "solver";
  for (std::size_t i = 0; i < runs.size(); ++i) report << ",run" << i;
  report << ",median\n";
  for (const auto& name : solver_names) {
    std::vector<double> values;
    report << name;
    for (const auto& run : runs) {
      const auto it = run.find(name);
      if (it == run.end()) {
        report << ",";
      } else {
        report << "," << io::format_double(it->second);
        values.push_back(it->second);
      }
    }
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      const double median = n % 2 ? values[n / 2]
                                  : 0.5 * (values[n / 2 - 1] + values[n / 2]);
      report << "," << io::format_double(median);
    } else {
      report << ",";
    }
    report << "\n";
  }

  bool ok = true;
  for (const auto& a : assertions) {
    std::vector<double> gains;
    for (const auto& run : runs) {
      const auto ia = run.find(a.solver_a);
      const auto ib = run.find(a.solver_b);
      if (ia != run.end() && ib != run.end()) gains.push_back(ia->second - ib->second);
    }
    if (gains.empty()) {
      report << "assert " << a.solver_a << "-" << a.solver_b << ": no data\n";
      ok = false;
      continue;
    }
    std::sort(gains.begin(), gains.end());
    const std::size_t n = gains.size();
    const double median =
        n % 2 ? gains[n / 2] : 0.5 * (gains[n / 2 - 1] + gains[n / 2]);
    const bool pass = median >= a.min_gain_db;
    report << "assert median[" << a.solver_a << " - " << a.solver_b
           << "] = " << io::format_double(median) << " dB >= "
           << io::format_double(a.min_gain_db) << " dB: " << (pass ? "pass" : "FAIL")
           << "\n";
    ok = ok && pass;
  }
  return ok;
}

}  // namespace robustcs
