#include "robustcs/regpath.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double now_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

long long count_nonzeros(const Eigen::VectorXd& x) {
  long long nnz = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) nnz += (x[i] != 0.0);
  return nnz;
}

double standard_normal_cdf(double a) { return 0.5 * std::erfc(-a / std::sqrt(2.0)); }

double standard_normal_pdf(double a) {
  return std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
}

}  // namespace

void PathConfig::validate() const {
  require(grid_points >= 2, "PathConfig: need at least two grid points");
  require(std::isfinite(decades) && decades > 0.0, "PathConfig: decades must be positive");
  require(std::isfinite(bisect_rel_width) && bisect_rel_width > 0.0,
          "PathConfig: bisect_rel_width must be positive");
  require(std::isfinite(epsilon) && epsilon > 0.0, "PathConfig: epsilon must be positive");
}

double lambda_max(const SensingProblem& prob, const HuberParams& params,
                  ResidualCriterion loss) {
  if (prob.y.isZero(0.0)) return 0.0;
  switch (loss) {
    case ResidualCriterion::Huber:
      return (prob.phi.transpose() * huber_psi_vec(prob.y, params))
          .lpNorm<Eigen::Infinity>();
    case ResidualCriterion::L2:
      return (prob.phi.transpose() * prob.y).lpNorm<Eigen::Infinity>();
    case ResidualCriterion::L1: {
      const Eigen::VectorXd s = prob.y.array().sign().matrix();
      return (prob.phi.transpose() * s).lpNorm<Eigen::Infinity>();
    }
  }
  return 0.0;
}

double criterion_value(const Eigen::VectorXd& r, const HuberParams& params,
                       ResidualCriterion kind) {
  switch (kind) {
    case ResidualCriterion::Huber:
      return robust_loss_residual(r, params);
    case ResidualCriterion::L1:
      return r.lpNorm<1>();
    case ResidualCriterion::L2:
      return r.squaredNorm();
  }
  return 0.0;
}

double estimate_epsilon(const HuberParams& params, Eigen::Index m, double sigma,
                        ResidualCriterion kind) {
  require(m >= 1, "estimate_epsilon: m must be at least 1");
  require(std::isfinite(sigma) && sigma >= 0.0, "estimate_epsilon: sigma must be nonnegative");
  if (sigma == 0.0) return 0.0;
  const double dm = static_cast<double>(m);
  switch (kind) {
    case ResidualCriterion::L2:
      return dm * sigma * sigma;
    case ResidualCriterion::L1:
      return dm * sigma * std::sqrt(2.0 / M_PI);
    case ResidualCriterion::Huber: {
      const double c = params.threshold();
      const double a = c / sigma;
      const double cdf = standard_normal_cdf(a);
      const double pdf = standard_normal_pdf(a);
      const double expected = 0.5 * sigma * sigma * (2.0 * cdf - 1.0 - 2.0 * a * pdf) +
                              2.0 * c * sigma * pdf - c * c * (1.0 - cdf);
      return dm * expected;
    }
  }
  return 0.0;
}

namespace {

// Runs the chosen solver at successive lambdas, carrying warm-start state and
// the shared factorization across calls.
class PathDriver {
 public:
  PathDriver(const SensingProblem& prob, const HuberParams& params, SolverChoice choice,
             const SolverOptions& opts, const Eigen::VectorXd* affine_c)
      : prob_(prob), params_(params), choice_(choice), opts_(opts), affine_c_(affine_c) {
    switch (choice_) {
      case SolverChoice::Fista:
        opts_.lipschitz = opts.lipschitz > 0.0
                              ? opts.lipschitz
                              : 2.0 * spectral_bound(prob.phi).lambda_max;
        break;
      case SolverChoice::Admm:
        cached_.emplace(prob.phi, opts.mu, QSpec{opts.eta + 2.0 * opts.beta, std::nullopt});
        break;
      case SolverChoice::Nested:
        cached_.emplace(prob.phi, opts.mu, QSpec{opts.eta, std::nullopt});
        break;
      case SolverChoice::Affine:
        require(affine_c != nullptr, "select_lambda: affine solver needs a constraint vector");
        cached_.emplace(prob.phi, opts.mu, QSpec{opts.eta, QSpec::RankOne{opts.eta2, *affine_c}});
        break;
      case SolverChoice::L1Loss:
        cached_.emplace(prob.phi, opts.eta, QSpec{opts.eta2, std::nullopt});
        break;
    }
  }

  Solution run(double lambda) {
    SolverOptions opts = opts_;
    opts.x0 = warm_x_;
    opts.u0 = warm_u_;
    Solution sol;
    switch (choice_) {
      case SolverChoice::Fista:
        sol = solve_fista_robust(prob_, lambda, params_, opts);
        break;
      case SolverChoice::Admm:
        sol = solve_admm_robust(prob_, lambda, params_, opts, &*cached_);
        break;
      case SolverChoice::Nested: {
        SolverOptions inner;  // default inner tolerances
        inner.eta = opts_.eta;
        inner.mu = opts_.mu;
        inner.max_iter = opts_.max_iter;
        sol = solve_nested_robust(prob_, lambda, params_, opts, inner, &*cached_);
        break;
      }
      case SolverChoice::Affine:
        sol = solve_admm_affine(prob_, lambda, *affine_c_, params_, opts, &*cached_);
        break;
      case SolverChoice::L1Loss:
        sol = solve_admm_l1loss(prob_, lambda, opts, &*cached_);
        break;
    }
    warm_x_ = sol.x;
    warm_u_ = sol.dual;
    return sol;
  }

 private:
  const SensingProblem& prob_;
  const HuberParams& params_;
  SolverChoice choice_;
  SolverOptions opts_;
  const Eigen::VectorXd* affine_c_;
  std::optional<CachedSolver> cached_;
  Eigen::VectorXd warm_x_, warm_u_;
};

Solution zero_solution(Eigen::Index n, double lambda, double criterion_at_zero) {
  Solution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  sol.status = SolveStatus::Converged;
  sol.final_lambda = lambda;
  IterationRecord rec;
  rec.objective = criterion_at_zero;
  sol.trace.push_back(rec);
  return sol;
}

}  // namespace

PathResult select_lambda(const SensingProblem& prob, const HuberParams& params,
                         SolverChoice solver, const PathConfig& cfg,
                         const SolverOptions& opts, const Eigen::VectorXd* affine_c) {
  cfg.validate();
  opts.validate();
  const auto start = std::chrono::steady_clock::now();

  const ResidualCriterion loss =
      solver == SolverChoice::L1Loss ? ResidualCriterion::L1 : ResidualCriterion::Huber;
  const double lam_max = lambda_max(prob, params, loss);

  PathResult out;
  const double crit0 = criterion_value(prob.y, params, cfg.criterion);
  out.records.push_back({lam_max, crit0, 0.0, 0, 0, now_seconds(start)});
  if (crit0 <= cfg.epsilon || lam_max == 0.0) {
    out.lambda_star = lam_max;
    out.solution = zero_solution(prob.dimension(), lam_max, crit0);
    out.status = crit0 <= cfg.epsilon ? PathStatus::Met : PathStatus::NotMet;
    return out;
  }

  PathDriver driver(prob, params, solver, opts, affine_c);
  auto evaluate = [&](double lambda) {
    Solution sol = driver.run(lambda);
    const double crit =
        criterion_value(prob.y - prob.phi * sol.x, params, cfg.criterion);
    out.records.push_back({lambda, crit, sol.x.lpNorm<1>(), count_nonzeros(sol.x),
                           sol.total_iterations(), now_seconds(start)});
    return std::make_pair(std::move(sol), crit);
  };

  const int steps = cfg.grid_points - 1;
  double hi = lam_max;
  std::optional<Solution> feasible;
  double feasible_lambda = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const double lambda =
        lam_max * std::pow(10.0, -cfg.decades * static_cast<double>(j) / steps);
    auto [sol, crit] = evaluate(lambda);
    if (crit <= cfg.epsilon) {
      feasible = std::move(sol);
      feasible_lambda = lambda;
      break;
    }
    hi = lambda;
    if (j == steps) {
      out.lambda_star = lambda;
      out.solution = std::move(sol);
      out.status = PathStatus::NotMet;
      std::sort(out.records.begin(), out.records.end(),
                [](const PathRecord& a, const PathRecord& b) { return a.lambda > b.lambda; });
      return out;
    }
  }

  // Bisect the bracketing interval on the log scale.
  double lo = feasible_lambda;
  while ((hi - lo) / hi > cfg.bisect_rel_width) {
    const double mid = std::sqrt(hi * lo);
    auto [sol, crit] = evaluate(mid);
    if (crit <= cfg.epsilon) {
      feasible = std::move(sol);
      lo = mid;
    } else {
      hi = mid;
    }
  }

  out.lambda_star = lo;
  out.solution = std::move(*feasible);
  out.status = PathStatus::Met;
  std::sort(out.records.begin(), out.records.end(),
            [](const PathRecord& a, const PathRecord& b) { return a.lambda > b.lambda; });
  return out;
}

MultiTaskPathResult select_lambda_multitask(const MultiTaskProblem& prob,
                                            const HuberParams& params, Engine engine,
                                            const PathConfig& cfg,
                                            const SolverOptions& opts) {
  cfg.validate();
  opts.validate();
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = prob.dimension();
  const Eigen::Index tasks = prob.tasks();

  // X = 0 is optimal as soon as every row of the loss gradient at zero has
  // l2 norm at most lambda.
  Eigen::MatrixXd grad0(n, tasks);
  for (Eigen::Index t = 0; t < tasks; ++t) {
    grad0.col(t) = prob.phi.transpose() * huber_psi_vec(prob.y.col(t), params);
  }
  double lam_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    lam_max = std::max(lam_max, grad0.row(i).norm());
  }

  auto total_criterion = [&](const Eigen::MatrixXd& x) {
    double total = 0.0;
    for (Eigen::Index t = 0; t < tasks; ++t) {
      total += criterion_value(prob.y.col(t) - prob.phi * x.col(t), params, cfg.criterion);
    }
    return total;
  };

  MultiTaskPathResult out;
  const double crit0 = total_criterion(Eigen::MatrixXd::Zero(n, tasks));
  out.records.push_back({lam_max, crit0, 0.0, 0, 0, now_seconds(start)});
  if (crit0 <= cfg.epsilon || lam_max == 0.0) {
    out.lambda_star = lam_max;
    out.solution.x = Eigen::MatrixXd::Zero(n, tasks);
    out.solution.status = SolveStatus::Converged;
    out.solution.final_lambda = lam_max;
    out.solution.trace.push_back({crit0, 0, 0, 0, 0, 0, 0});
    out.status = crit0 <= cfg.epsilon ? PathStatus::Met : PathStatus::NotMet;
    return out;
  }

  std::optional<CachedSolver> cached;
  SolverOptions base = opts;
  if (engine == Engine::Admm) {
    cached.emplace(prob.phi, opts.mu, QSpec{opts.eta, std::nullopt});
  } else if (base.lipschitz <= 0.0) {
    base.lipschitz = 2.0 * spectral_bound(prob.phi).lambda_max;
  }

  Eigen::MatrixXd warm_x = Eigen::MatrixXd::Zero(n, tasks);
  Eigen::MatrixXd warm_u = Eigen::MatrixXd::Zero(n, tasks);
  auto evaluate = [&](double lambda) {
    MultiTaskSolution sol = solve_multitask(prob, lambda, params, engine, base,
                                            cached ? &*cached : nullptr, &warm_x,
                                            engine == Engine::Admm ? &warm_u : nullptr);
    warm_x = sol.x;
    if (engine == Engine::Admm) warm_u = sol.dual;
    const double crit = total_criterion(sol.x);
    double l1 = 0.0;
    long long nnz = 0;
    for (Eigen::Index t = 0; t < tasks; ++t) {
      l1 += sol.x.col(t).lpNorm<1>();
      nnz += count_nonzeros(sol.x.col(t));
    }
    out.records.push_back({lambda, crit, l1, nnz,
                           static_cast<long long>(sol.trace.size()), now_seconds(start)});
    return std::make_pair(std::move(sol), crit);
  };

  const int steps = cfg.grid_points - 1;
  double hi = lam_max;
  std::optional<MultiTaskSolution> feasible;
  double feasible_lambda = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const double lambda =
        lam_max * std::pow(10.0, -cfg.decades * static_cast<double>(j) / steps);
    auto [sol, crit] = evaluate(lambda);
    if (crit <= cfg.epsilon) {
      feasible = std::move(sol);
      feasible_lambda = lambda;
      break;
    }
    hi = lambda;
    if (j == steps) {
      out.lambda_star = lambda;
      out.solution = std::move(sol);
      out.status = PathStatus::NotMet;
      std::sort(out.records.begin(), out.records.end(),
                [](const PathRecord& a, const PathRecord& b) { return a.lambda > b.lambda; });
      return out;
    }
  }

  double lo = feasible_lambda;
  while ((hi - lo) / hi > cfg.bisect_rel_width) {
    const double mid = std::sqrt(hi * lo);
    auto [sol, crit] = evaluate(mid);
    if (crit <= cfg.epsilon) {
      feasible = std::move(sol);
      lo = mid;
    } else {
      hi = mid;
    }
  }

  out.lambda_star = lo;
  out.solution = std::move(*feasible);
  out.status = PathStatus::Met;
  std::sort(out.records.begin(), out.records.end(),
            [](const PathRecord& a, const PathRecord& b) { return a.lambda > b.lambda; });
  return out;
}

}  // namespace robustcs
