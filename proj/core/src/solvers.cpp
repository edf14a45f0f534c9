#include "robustcs/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "robustcs/prox.hpp"

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

Eigen::VectorXd init_vector(const Eigen::VectorXd& given, Eigen::Index n, const char* what) {
  if (given.size() == 0) return Eigen::VectorXd::Zero(n);
  require(given.size() == n, what);
  return given;
}

// Latching no-progress detector on the primal residual.
struct StallDetector {
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  bool stalled = false;

  void update(double primal) {
    if (primal < best) {
      best = primal;
      since_best = 0;
    } else if (++since_best >= 100) {
      stalled = true;
    }
  }
};

double group_row_norms_sum(const Eigen::MatrixXd& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) total += x.row(i).norm();
  return total;
}

Eigen::MatrixXd rowwise_group_shrink(const Eigen::MatrixXd& v, double tau) {
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out.row(i) = group_shrink_factor(v.row(i).norm(), tau) * v.row(i);
  }
  return out;
}

Eigen::MatrixXd clamp_matrix(const Eigen::MatrixXd& r, double c) {
  return r.array().min(c).max(-c).matrix();
}

}  // namespace

void SolverOptions::validate() const {
  require(std::isfinite(eta) && eta > 0.0, "SolverOptions: eta must be positive");
  require(std::isfinite(eta2) && eta2 > 0.0, "SolverOptions: eta2 must be positive");
  require(std::isfinite(mu) && mu > 0.0, "SolverOptions: mu must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "SolverOptions: beta must be nonnegative");
  require(max_iter >= 1, "SolverOptions: max_iter must be at least 1");
  require(std::isfinite(abs_tol) && abs_tol > 0.0, "SolverOptions: abs_tol must be positive");
  require(std::isfinite(rel_tol) && rel_tol > 0.0, "SolverOptions: rel_tol must be positive");
  require(std::isfinite(t0) && t0 >= 1.0, "SolverOptions: t0 must be at least 1");
}

MultiTaskProblem::MultiTaskProblem(Eigen::MatrixXd phi_in, Eigen::MatrixXd y_in)
    : phi(std::move(phi_in)), y(std::move(y_in)) {
  require(phi.rows() >= 1 && phi.cols() >= 1, "MultiTaskProblem: phi must be at least 1x1");
  require(y.cols() >= 1, "MultiTaskProblem: at least one task required");
  require(y.rows() == phi.rows(), "MultiTaskProblem: measurement rows must match phi");
  require(phi.allFinite() && y.allFinite(), "MultiTaskProblem: non-finite entries");
}

StopDecision check_stopping(const SolverOptions& opts,
                            std::span<const ResidualCheck> primal,
                            std::span<const ResidualCheck> dual) {
  for (const auto& c : primal) {
    if (c.norm > std::sqrt(c.dim) * opts.abs_tol + opts.rel_tol * c.scale)
      return StopDecision::Continue;
  }
  for (const auto& c : dual) {
    if (c.norm > std::sqrt(c.dim) * opts.abs_tol + opts.rel_tol * c.scale)
      return StopDecision::Continue;
  }
  return StopDecision::Converged;
}

StopDecision check_stopping(const SolverOptions& opts, double step_norm,
                            double iterate_norm) {
  return step_norm <= opts.abs_tol * std::max(1.0, iterate_norm)
             ? StopDecision::Converged
             : StopDecision::Continue;
}

double optimality_residual(const SensingProblem& prob, double lambda,
                           const HuberParams& params, const Eigen::VectorXd& x,
                           double beta) {
  Eigen::VectorXd grad = robust_grad(x, prob, params);
  if (beta != 0.0) grad += 2.0 * beta * x;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x[i] != 0.0) ? grad[i] + lambda * (x[i] > 0.0 ? 1.0 : -1.0)
                                   : std::max(std::abs(grad[i]) - lambda, 0.0);
    sq += d * d;
  }
  return std::sqrt(sq);
}

double optimality_residual_multitask(const MultiTaskProblem& prob, double lambda,
                                     const HuberParams& params,
                                     const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd grad =
      prob.phi.transpose() * clamp_matrix(prob.phi * x - prob.y, params.threshold());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double row_norm = x.row(i).norm();
    if (row_norm > 0.0) {
      sq += (grad.row(i) + (lambda / row_norm) * x.row(i)).squaredNorm();
    } else {
      const double slack = std::max(grad.row(i).norm() - lambda, 0.0);
      sq += slack * slack;
    }
  }
  return std::sqrt(sq);
}

Eigen::VectorXd power_constraint_vector(double total, Eigen::Index n) {
  require(std::isfinite(total) && total != 0.0,
          "power_constraint_vector: total must be nonzero");
  return Eigen::VectorXd::Constant(n, 1.0 / total);
}

// ---------------------------------------------------------------------------
// FISTA

Solution solve_fista_robust(const SensingProblem& prob, double lambda,
                            const HuberParams& params, const SolverOptions& opts) {
  opts.validate();
  require(lambda > 0.0, "solve_fista_robust: lambda must be positive");
  const Eigen::Index n = prob.dimension();

  double L = opts.lipschitz;
  if (L <= 0.0) {
    const SpectralBound bound = spectral_bound(prob.phi);
    L = bound.zero_matrix ? 1.0 : 2.0 * bound.lambda_max;
  }

  Eigen::VectorXd x_prev = init_vector(opts.x0, n, "solve_fista_robust: x0 length mismatch");
  Eigen::VectorXd z = x_prev;
  double t = opts.t0;

  Solution sol;
  sol.final_lambda = lambda;
  sol.trace.reserve(static_cast<std::size_t>(std::min(opts.max_iter, 4096)));
  Stopwatch clock;

  for (int k = 1; k <= opts.max_iter; ++k) {
    const Eigen::VectorXd grad =
        prob.phi.transpose() * huber_psi_vec(prob.phi * z - prob.y, params);
    const Eigen::VectorXd v = z - grad / L;
    const Eigen::VectorXd x = (opts.beta > 0.0)
                                  ? elastic_shrink(v, lambda, 2.0 * opts.beta, L)
                                  : soft_threshold(v, lambda / L);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double step = (x - x_prev).norm();
    z = x + ((t - 1.0) / t_next) * (x - x_prev);

    IterationRecord rec;
    rec.objective = robust_loss(x, prob, params) + lambda * x.lpNorm<1>() +
                    opts.beta * x.squaredNorm();
    rec.primal_residual = step;
    rec.seconds = clock.seconds();
    sol.trace.push_back(rec);

    sol.x = x;
    if (opts.observer && opts.observer(x)) {
      sol.status = SolveStatus::MaxIterations;
      return sol;
    }
    if (check_stopping(opts, step, x.norm()) == StopDecision::Converged &&
        optimality_residual(prob, lambda, params, x, opts.beta) <= 10.0 * opts.abs_tol) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
    x_prev = x;
    t = t_next;
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Generalized ADMM, Huber loss

Solution solve_admm_robust(const SensingProblem& prob, double lambda,
                           const HuberParams& params, const SolverOptions& opts,
                           const CachedSolver* cached) {
  opts.validate();
  require(lambda > 0.0, "solve_admm_robust: lambda must be positive");
  const Eigen::Index n = prob.dimension();
  const double rho1 = opts.eta + 2.0 * opts.beta;

  std::optional<CachedSolver> own;
  if (cached == nullptr) {
    own.emplace(prob.phi, opts.mu, QSpec{rho1, std::nullopt});
  } else {
    require(cached->phi().rows() == prob.phi.rows() && cached->phi().cols() == n &&
                cached->mu() == opts.mu && cached->qspec().rho1 == rho1 &&
                !cached->qspec().rank_one,
            "solve_admm_robust: cached solver does not match this system");
  }
  const CachedSolver& system = cached ? *cached : *own;

  Eigen::VectorXd x = init_vector(opts.x0, n, "solve_admm_robust: x0 length mismatch");
  Eigen::VectorXd z = x;
  Eigen::VectorXd u = init_vector(opts.u0, n, "solve_admm_robust: u0 length mismatch");
  Eigen::VectorXd phi_x = prob.phi * x;

  Solution sol;
  sol.final_lambda = lambda;
  Stopwatch clock;
  StallDetector stall;

  for (int k = 1; k <= opts.max_iter; ++k) {
    const Eigen::VectorXd v =
        huber_psi_vec(prob.y - phi_x, params) / opts.mu + phi_x;
    x = system.solve(Eigen::VectorXd(opts.mu * (prob.phi.transpose() * v) +
                                     opts.eta * (z - u)));
    phi_x.noalias() = prob.phi * x;

    const Eigen::VectorXd z_prev = z;
    z = soft_threshold(Eigen::VectorXd(x + u), lambda / opts.eta);
    u += x - z;

    const double primal = (x - z).norm();
    const double dual = opts.eta * (z - z_prev).norm();
    stall.update(primal);

    IterationRecord rec;
    rec.objective = robust_loss_residual(prob.y - phi_x, params) +
                    lambda * x.lpNorm<1>() + opts.beta * x.squaredNorm();
    rec.primal_residual = primal;
    rec.dual_residual = dual;
    rec.seconds = clock.seconds();
    sol.trace.push_back(rec);

    sol.x = z;
    sol.dual = u;
    sol.stalled = stall.stalled;
    if (opts.observer && opts.observer(z)) {
      sol.status = SolveStatus::MaxIterations;
      return sol;
    }

    const ResidualCheck primal_check{primal, static_cast<double>(n),
                                     std::max(x.norm(), z.norm())};
    const ResidualCheck dual_check{dual, static_cast<double>(n),
                                   opts.eta * u.norm()};
    if (check_stopping(opts, {&primal_check, 1}, {&dual_check, 1}) ==
            StopDecision::Converged &&
        optimality_residual(prob, lambda, params, z, opts.beta) <= 10.0 * opts.abs_tol) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Nested baseline: outer surrogate refresh, inner quadratic-loss ADMM.

namespace {

struct InnerState {
  Eigen::VectorXd x, z, u;
};

struct InnerOutcome {
  long long iterations = 0;
  bool aborted = false;
};

// Standard ADMM on min (mu/2)||v - phi x||^2 + lambda ||z||_1 s.t. x = z.
// The x update is exact, so this is the plain two-block method.
InnerOutcome admm_quadratic(const Eigen::MatrixXd& phi, const Eigen::VectorXd& v,
                            double lambda, double mu, const SolverOptions& inner_opts,
                            double tol_scale, const CachedSolver& system,
                            InnerState& st, const IterateObserver& observer) {
  SolverOptions local = inner_opts;
  local.abs_tol = std::max(inner_opts.abs_tol * tol_scale, 1e-15);
  local.rel_tol = std::max(inner_opts.rel_tol * tol_scale, 1e-15);
  const double n = static_cast<double>(phi.cols());
  const Eigen::VectorXd phit_v = mu * (phi.transpose() * v);

  InnerOutcome out;
  for (int k = 1; k <= inner_opts.max_iter; ++k) {
    st.x = system.solve(Eigen::VectorXd(phit_v + inner_opts.eta * (st.z - st.u)));
    const Eigen::VectorXd z_prev = st.z;
    st.z = soft_threshold(Eigen::VectorXd(st.x + st.u), lambda / inner_opts.eta);
    st.u += st.x - st.z;
    ++out.iterations;

    if (observer && observer(st.z)) {
      out.aborted = true;
      return out;
    }
    const ResidualCheck primal{(st.x - st.z).norm(), n,
                               std::max(st.x.norm(), st.z.norm())};
    const ResidualCheck dual{inner_opts.eta * (st.z - z_prev).norm(), n,
                             inner_opts.eta * st.u.norm()};
    if (check_stopping(local, {&primal, 1}, {&dual, 1}) == StopDecision::Converged) {
      return out;
    }
  }
  return out;
}

}  // namespace

Solution solve_nested_robust(const SensingProblem& prob, double lambda,
                             const HuberParams& params, const SolverOptions& opts,
                             const SolverOptions& inner_opts,
                             const CachedSolver* cached) {
  opts.validate();
  inner_opts.validate();
  require(lambda > 0.0, "solve_nested_robust: lambda must be positive");
  const Eigen::Index n = prob.dimension();

  std::optional<CachedSolver> own;
  if (cached == nullptr) {
    own.emplace(prob.phi, opts.mu, QSpec{inner_opts.eta, std::nullopt});
  } else {
    require(cached->mu() == opts.mu && cached->qspec().rho1 == inner_opts.eta &&
                !cached->qspec().rank_one && cached->phi().cols() == n,
            "solve_nested_robust: cached solver does not match the inner system");
  }
  const CachedSolver& system = cached ? *cached : *own;

  Eigen::VectorXd x = init_vector(opts.x0, n, "solve_nested_robust: x0 length mismatch");
  InnerState inner{x, x, init_vector(opts.u0, n, "solve_nested_robust: u0 length mismatch")};

  Solution sol;
  sol.final_lambda = lambda;
  Stopwatch clock;
  long long cumulative_inner = 0;
  double tol_scale = 1.0;

  auto surrogate_value = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& p) {
    return 0.5 * opts.mu * (v - prob.phi * p).squaredNorm() + lambda * p.lpNorm<1>();
  };

  for (int k = 1; k <= opts.max_iter; ++k) {
    const Eigen::VectorXd phi_x = prob.phi * x;
    const Eigen::VectorXd v =
        huber_psi_vec(prob.y - phi_x, params) / opts.mu + phi_x;
    const double surrogate_at_x = surrogate_value(v, x);

    // The surrogate touches the objective at x, so any candidate that lowers
    // the surrogate lowers the objective. Retry with tighter inner tolerances
    // if the inexact inner solve failed to descend.
    inner.x = x;
    Eigen::VectorXd candidate = x;
    double retry_scale = tol_scale;
    bool descended = false;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const InnerOutcome inner_out = admm_quadratic(prob.phi, v, lambda, opts.mu,
                                                    inner_opts, retry_scale, system,
                                                    inner, opts.observer);
      cumulative_inner += inner_out.iterations;
      if (inner_out.aborted) {
        sol.x = inner.z;
        sol.dual = inner.u;
        sol.status = SolveStatus::MaxIterations;
        return sol;
      }
      candidate = inner.z;
      if (surrogate_value(v, candidate) <= surrogate_at_x + 1e-12) {
        descended = true;
        break;
      }
      retry_scale *= 0.1;
    }
    if (!descended) candidate = x;  // keep the current iterate rather than ascend

    const double step = (candidate - x).norm();
    x = candidate;

    IterationRecord rec;
    rec.objective = robust_loss(x, prob, params) + lambda * x.lpNorm<1>();
    rec.primal_residual = step;
    rec.seconds = clock.seconds();
    rec.inner_iterations = cumulative_inner;
    sol.trace.push_back(rec);
    sol.x = x;
    sol.dual = inner.u;

    if (check_stopping(opts, step, x.norm()) == StopDecision::Converged) {
      if (optimality_residual(prob, lambda, params, x) <= 10.0 * opts.abs_tol) {
        sol.status = SolveStatus::Converged;
        return sol;
      }
      // Outer loop settled but the surrogate fixed point is not yet accurate
      // enough: demand more of the inner solves.
      if (tol_scale > 1e-10) tol_scale *= 0.1;
    }
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Affine-constrained ADMM: c^T x = 1 via a second scaled dual.

Solution solve_admm_affine(const SensingProblem& prob, double lambda,
                           const Eigen::VectorXd& c, const HuberParams& params,
                           const SolverOptions& opts, const CachedSolver* cached) {
  opts.validate();
  require(lambda > 0.0, "solve_admm_affine: lambda must be positive");
  const Eigen::Index n = prob.dimension();
  require(c.size() == n, "solve_admm_affine: c length mismatch");
  require(c.allFinite() && c.norm() > 0.0, "solve_admm_affine: c must be nonzero");

  std::optional<CachedSolver> own;
  if (cached == nullptr) {
    own.emplace(prob.phi, opts.mu, QSpec{opts.eta, QSpec::RankOne{opts.eta2, c}});
  } else {
    require(cached->mu() == opts.mu && cached->qspec().rho1 == opts.eta &&
                cached->qspec().rank_one && cached->phi().cols() == n,
            "solve_admm_affine: cached solver does not match this system");
  }
  const CachedSolver& system = cached ? *cached : *own;

  Eigen::VectorXd x = init_vector(opts.x0, n, "solve_admm_affine: x0 length mismatch");
  Eigen::VectorXd z = x;
  Eigen::VectorXd u1 = init_vector(opts.u0, n, "solve_admm_affine: u0 length mismatch");
  double u2 = 0.0;
  Eigen::VectorXd phi_x = prob.phi * x;

  Solution sol;
  sol.final_lambda = lambda;
  Stopwatch clock;
  StallDetector stall;

  for (int k = 1; k <= opts.max_iter; ++k) {
    const Eigen::VectorXd v =
        huber_psi_vec(prob.y - phi_x, params) / opts.mu + phi_x;
    x = system.solve(Eigen::VectorXd(opts.mu * (prob.phi.transpose() * v) +
                                     opts.eta * (z - u1) +
                                     opts.eta2 * (1.0 - u2) * c));
    phi_x.noalias() = prob.phi * x;

    const Eigen::VectorXd z_prev = z;
    z = soft_threshold(Eigen::VectorXd(x + u1), lambda / opts.eta);
    const double cx = c.dot(x);
    u1 += x - z;
    u2 += cx - 1.0;

    const double primal1 = (x - z).norm();
    const double primal2 = std::abs(cx - 1.0);
    const double dual = opts.eta * (z - z_prev).norm();
    stall.update(primal1);

    IterationRecord rec;
    rec.objective = robust_loss_residual(prob.y - phi_x, params) + lambda * x.lpNorm<1>();
    rec.primal_residual = primal1;
    rec.dual_residual = dual;
    rec.primal_residual2 = primal2;
    rec.seconds = clock.seconds();
    sol.trace.push_back(rec);

    // The feasible x iterate is the reported solution for this variant.
    sol.x = x;
    sol.dual = u1;
    sol.stalled = stall.stalled;
    if (opts.observer && opts.observer(x)) {
      sol.status = SolveStatus::MaxIterations;
      return sol;
    }

    const ResidualCheck primal_checks[] = {
        {primal1, static_cast<double>(n), std::max(x.norm(), z.norm())},
        {primal2, 1.0, 0.0},  // absolute feasibility gate
    };
    const ResidualCheck dual_check{dual, static_cast<double>(n), opts.eta * u1.norm()};
    if (check_stopping(opts, primal_checks, {&dual_check, 1}) == StopDecision::Converged) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// l1 loss, double operator splitting.

Solution solve_admm_l1loss(const SensingProblem& prob, double lambda,
                           const SolverOptions& opts, const CachedSolver* cached) {
  opts.validate();
  require(lambda > 0.0, "solve_admm_l1loss: lambda must be positive");
  const Eigen::Index n = prob.dimension();
  const Eigen::Index m = prob.measurements();
  const double eta1 = opts.eta;
  const double eta2 = opts.eta2;

  std::optional<CachedSolver> own;
  if (cached == nullptr) {
    own.emplace(prob.phi, eta1, QSpec{eta2, std::nullopt});
  } else {
    require(cached->mu() == eta1 && cached->qspec().rho1 == eta2 &&
                !cached->qspec().rank_one && cached->phi().cols() == n,
            "solve_admm_l1loss: cached solver does not match this system");
  }
  const CachedSolver& system = cached ? *cached : *own;

  Eigen::VectorXd x = init_vector(opts.x0, n, "solve_admm_l1loss: x0 length mismatch");
  Eigen::VectorXd z = x;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u2 = init_vector(opts.u0, n, "solve_admm_l1loss: u0 length mismatch");

  Solution sol;
  sol.final_lambda = lambda;
  Stopwatch clock;
  StallDetector stall;

  const double y_norm = prob.y.norm();

  for (int k = 1; k <= opts.max_iter; ++k) {
    x = system.solve(Eigen::VectorXd(
        eta1 * (prob.phi.transpose() * (v + prob.y - u1)) + eta2 * (z - u2)));
    const Eigen::VectorXd phi_x = prob.phi * x;

    const Eigen::VectorXd t = phi_x - prob.y + u1;
    const Eigen::VectorXd v_prev = v;
    v = soft_threshold(t, 1.0 / eta1);
    const Eigen::VectorXd z_prev = z;
    z = soft_threshold(Eigen::VectorXd(x + u2), lambda / eta2);

    u1 += phi_x - v - prob.y;
    u2 += x - z;

    const double primal1 = (x - z).norm();
    const double primal2 = (phi_x - prob.y - v).norm();
    const double dual1 = eta1 * (v - v_prev).norm();
    const double dual2 = eta2 * (z - z_prev).norm();
    stall.update(std::max(primal1, primal2));

    IterationRecord rec;
    rec.objective = (prob.y - phi_x).lpNorm<1>() + lambda * z.lpNorm<1>();
    rec.primal_residual = primal1;
    rec.dual_residual = dual1;
    rec.primal_residual2 = primal2;
    rec.dual_residual2 = dual2;
    rec.seconds = clock.seconds();
    sol.trace.push_back(rec);

    sol.x = z;
    sol.dual = u2;
    sol.stalled = stall.stalled;
    if (opts.observer && opts.observer(z)) {
      sol.status = SolveStatus::MaxIterations;
      return sol;
    }

    const ResidualCheck primal_checks[] = {
        {primal1, static_cast<double>(n), std::max(x.norm(), z.norm())},
        {primal2, static_cast<double>(m),
         std::max({phi_x.norm(), v.norm(), y_norm})},
    };
    const ResidualCheck dual_checks[] = {
        {dual1, static_cast<double>(m), eta1 * u1.norm()},
        {dual2, static_cast<double>(n), eta2 * u2.norm()},
    };
    if (check_stopping(opts, primal_checks, dual_checks) == StopDecision::Converged) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Multi-task: row-coupled group shrinkage with either engine.

MultiTaskSolution solve_multitask(const MultiTaskProblem& prob, double lambda,
                                  const HuberParams& params, Engine engine,
                                  const SolverOptions& opts,
                                  const CachedSolver* cached,
                                  const Eigen::MatrixXd* x0, const Eigen::MatrixXd* u0) {
  opts.validate();
  require(lambda > 0.0, "solve_multitask: lambda must be positive");
  const Eigen::Index n = prob.dimension();
  const Eigen::Index tasks = prob.tasks();
  const double c = params.threshold();

  MultiTaskSolution sol;
  sol.final_lambda = lambda;
  Stopwatch clock;

  auto objective = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& residual) {
    return robust_loss_residual(
               Eigen::Map<const Eigen::VectorXd>(residual.data(), residual.size()),
               params) +
           lambda * group_row_norms_sum(x);
  };

  if (engine == Engine::Fista) {
    double L = opts.lipschitz;
    if (L <= 0.0) {
      const SpectralBound bound = spectral_bound(prob.phi);
      L = bound.zero_matrix ? 1.0 : 2.0 * bound.lambda_max;
    }
    Eigen::MatrixXd x_prev =
        x0 ? *x0 : Eigen::MatrixXd::Zero(n, tasks);
    require(x_prev.rows() == n && x_prev.cols() == tasks,
            "solve_multitask: x0 shape mismatch");
    Eigen::MatrixXd z = x_prev;
    double t = opts.t0;

    for (int k = 1; k <= opts.max_iter; ++k) {
      const Eigen::MatrixXd grad =
          prob.phi.transpose() * clamp_matrix(prob.phi * z - prob.y, c);
      const Eigen::MatrixXd x = rowwise_group_shrink(z - grad / L, lambda / L);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double step = (x - x_prev).norm();
      z = x + ((t - 1.0) / t_next) * (x - x_prev);

      IterationRecord rec;
      rec.objective = objective(x, prob.y - prob.phi * x);
      rec.primal_residual = step;
      rec.seconds = clock.seconds();
      sol.trace.push_back(rec);
      sol.x = x;

      if (check_stopping(opts, step, x.norm()) == StopDecision::Converged &&
          optimality_residual_multitask(prob, lambda, params, x) <=
              10.0 * opts.abs_tol) {
        sol.status = SolveStatus::Converged;
        return sol;
      }
      x_prev = x;
      t = t_next;
    }
    sol.status = SolveStatus::MaxIterations;
    return sol;
  }

  // ADMM engine.
  std::optional<CachedSolver> own;
  if (cached == nullptr) {
    own.emplace(prob.phi, opts.mu, QSpec{opts.eta, std::nullopt});
  } else {
    require(cached->mu() == opts.mu && cached->qspec().rho1 == opts.eta &&
                !cached->qspec().rank_one && cached->phi().cols() == n,
            "solve_multitask: cached solver does not match this system");
  }
  const CachedSolver& system = cached ? *cached : *own;

  Eigen::MatrixXd x = x0 ? *x0 : Eigen::MatrixXd::Zero(n, tasks);
  require(x.rows() == n && x.cols() == tasks, "solve_multitask: x0 shape mismatch");
  Eigen::MatrixXd z = x;
  Eigen::MatrixXd u = u0 ? *u0 : Eigen::MatrixXd::Zero(n, tasks);
  require(u.rows() == n && u.cols() == tasks, "solve_multitask: u0 shape mismatch");
  Eigen::MatrixXd phi_x = prob.phi * x;
  StallDetector stall;

  for (int k = 1; k <= opts.max_iter; ++k) {
    const Eigen::MatrixXd v = clamp_matrix(prob.y - phi_x, c) / opts.mu + phi_x;
    x = system.solve(Eigen::MatrixXd(opts.mu * (prob.phi.transpose() * v) +
                                     opts.eta * (z - u)));
    phi_x.noalias() = prob.phi * x;

    const Eigen::MatrixXd z_prev = z;
    z = rowwise_group_shrink(x + u, lambda / opts.eta);
    u += x - z;

    const double primal = (x - z).norm();
    const double dual = opts.eta * (z - z_prev).norm();
    stall.update(primal);

    IterationRecord rec;
    rec.objective = objective(x, prob.y - phi_x);
    rec.primal_residual = primal;
    rec.dual_residual = dual;
    rec.seconds = clock.seconds();
    sol.trace.push_back(rec);
    sol.x = z;
    sol.dual = u;
    sol.stalled = stall.stalled;

    const double dim = static_cast<double>(n * tasks);
    const ResidualCheck primal_check{primal, dim, std::max(x.norm(), z.norm())};
    const ResidualCheck dual_check{dual, dim, opts.eta * u.norm()};
    if (check_stopping(opts, {&primal_check, 1}, {&dual_check, 1}) ==
            StopDecision::Converged &&
        optimality_residual_multitask(prob, lambda, params, z) <= 10.0 * opts.abs_tol) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
  }
  sol.status = SolveStatus::MaxIterations;
  return sol;
}

}  // namespace robustcs
