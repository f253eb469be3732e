#include <cmath>
#include <map>
#include <string>

#include "pff/errors.hpp"
#include "pff/solver.hpp"

namespace pff {

void StaggeredConfig::validate() const {
  if (!(t_d > 0.0)) throw ConfigError("damage tolerance must be positive", "t_d");
  if (!std::isfinite(t_u)) throw ConfigError("displacement tolerance must be finite", "t_u");
  if (k_max < 1) throw ConfigError("k_max must be at least 1", "k_max");
  if (!(extrapolation >= 0.0) || !std::isfinite(extrapolation))
    throw ConfigError("extrapolation must be non-negative", "extrapolation");
  if (elastic_max_iterations < 1)
    throw ConfigError("elastic_max_iterations must be at least 1", "elastic_max_iterations");
  if (!(elasticity_solver.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive", "cg_tolerance");
  if (!(damage_solver.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive", "cg_tolerance");
}

FieldState FieldState::zero(const Discretization& disc) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_displacement_dofs())),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_nodes()))};
}

LoadProgram LoadProgram::monotonic(const std::vector<DirichletCondition>& fixed, const std::string& loaded_set,
                                   int component, double increment, double final_value) {
  if (!(increment > 0.0)) throw ConfigError("load increment must be positive", "increment");
  if (!(final_value > 0.0)) throw ConfigError("final displacement must be positive", "final_displacement");
  LoadProgram p;
  p.reaction_set = loaded_set;
  p.reaction_component = component;
  const auto n = static_cast<int>(std::llround(std::ceil(final_value / increment - 1e-9)));
  for (int i = 1; i <= n; ++i) {
    LoadStep s;
    s.applied_displacement = i == n ? final_value : i * increment;
    s.conditions = fixed;
    s.conditions.push_back({loaded_set, component, s.applied_displacement});
    p.steps.push_back(std::move(s));
  }
  return p;
}

bool LoadHistory::all_converged() const {
  if (failure) return false;
  for (const auto& s : steps)
    if (!s.converged) return false;
  return true;
}

EnergyReport compute_energies(const Discretization& disc, const MaterialParams& params,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& alpha) {
  EnergyReport r;
  const std::span<const double> a(alpha.data(), static_cast<std::size_t>(alpha.size()));
  r.elastic = stored_energy(disc, params, a, {u.data(), static_cast<std::size_t>(u.size())});
  r.dissipated = dissipated_energy(disc, params, a);
  r.total = r.elastic + r.dissipated;
  return r;
}

namespace {

std::vector<DirichletValue> collect_constraints(const Discretization& disc,
                                                std::span<const DirichletCondition> bcs) {
  const int dim = disc.dim();
  std::map<int, double> by_dof;  // later conditions override earlier ones
  for (const auto& c : bcs) {
    if (c.component < 0 || c.component >= dim)
      throw ConfigError("component " + std::to_string(c.component) + " invalid for a " + std::to_string(dim) +
                            "D mesh",
                        "component");
    if (!std::isfinite(c.value)) throw ConfigError("non-finite prescribed displacement", "value");
    for (int node : disc.mesh().boundary_set(c.set)) by_dof[node * dim + c.component] = c.value;
  }
  std::vector<DirichletValue> out;
  out.reserve(by_dof.size());
  for (const auto& [dof, v] : by_dof) out.push_back({dof, v});
  return out;
}

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NumericalFailureError(std::string("non-finite values in ") + what);
}

class Engine {
public:
  Engine(const Discretization& disc, const MaterialParams& params, const StaggeredConfig& config)
      : disc_(disc), params_(params), config_(config), u_solver_(config.elasticity_solver),
        a_solver_(config.damage_solver) {
    t_u_ = config.t_u > 0.0 ? config.t_u : 1e-6 * mesh_diameter(disc.mesh());
  }

  StepResult step(const FieldState& previous, std::span<const DirichletCondition> bcs,
                  const std::optional<ReactionProbe>& probe) {
    const auto constraints = collect_constraints(disc_, bcs);
    StepResult r;
    Eigen::VectorXd u = previous.u;
    Eigen::VectorXd alpha = previous.alpha;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(alpha.size());

    for (int k = 1; k <= config_.k_max; ++k) {
      r.iterations = k;
      const Eigen::VectorXd u_old = u;
      const Eigen::VectorXd a_old = alpha;

      u = minimize_elastic(u, alpha, constraints, r.elastic_solves);
      check_finite(u, "displacement");
      r.half_step_energies.push_back(total_energy(u, alpha));

      const SparseSystem sys = disc_.plane_mode() == PlaneMode::Stress && disc_.dim() == 2
                                   ? assemble_damage(disc_, params_, view(u), view(alpha))
                                   : assemble_damage(disc_, params_, view(u));
      const Eigen::VectorXd& lower =
          config_.irreversibility == IrreversibilityMode::Inner ? a_old : previous.alpha;
      if (config_.damage_mode == DamageSolveMode::BoundConstrained) {
        BoundSolveStats stats;
        alpha = solve_bound_constrained(sys, lower, ones, a_old, a_solver_, &stats);
        r.upper_bound_nodes = stats.at_upper_bound;
      } else {
        const Eigen::VectorXd candidate = a_solver_.solve(sys.matrix, sys.rhs, &a_old);
        check_finite(candidate, "damage");
        r.upper_bound_nodes = static_cast<int>((candidate.array() >= 1.0).count());
        alpha = enforce_irreversibility(candidate, lower);
      }
      check_finite(alpha, "damage");
      double w_damage = total_energy(u, alpha);
      // the slow mode of alternate minimization is a crack front creeping a
      // little per iteration: step further along the last full update while
      // that lowers the energy (from k = 2 the Dirichlet values are in place)
      for (double w = k > 1 ? config_.extrapolation : 0.0; w >= 0.5; w *= 0.5) {
        Eigen::VectorXd trial_u = u + w * (u - u_old);
        Eigen::VectorXd trial_a = (alpha + w * (alpha - a_old)).cwiseMax(lower).cwiseMin(ones);
        const double e = total_energy(trial_u, trial_a);
        if (e < w_damage) {
          u = std::move(trial_u);
          alpha = std::move(trial_a);
          w_damage = e;
          break;
        }
      }
      r.half_step_energies.push_back(w_damage);

      double du = (u - u_old).norm();
      double da = (alpha - a_old).lpNorm<Eigen::Infinity>();
      if (config_.relative_norms) {
        du /= std::max(u.norm(), 1e-300);
        da /= std::max(alpha.lpNorm<Eigen::Infinity>(), 1e-300);
      }
      if (du <= t_u_ && da <= config_.t_d) {
        r.converged = true;
        break;
      }
    }

    r.state = {std::move(u), std::move(alpha)};
    r.energy = compute_energies(disc_, params_, r.state.u, r.state.alpha);
    if (probe)
      r.energy.reaction =
          reaction_force(disc_, params_, view(r.state.alpha), view(r.state.u), probe->set, probe->component);
    return r;
  }

private:
  double total_energy(const Eigen::VectorXd& u, const Eigen::VectorXd& alpha) const {
    return stored_energy(disc_, params_, view(alpha), view(u)) + dissipated_energy(disc_, params_, view(alpha));
  }

  // Newton on the piecewise quadratic stored energy: each iteration solves with
  // the branch pattern of the current iterate. The first update also moves the
  // constrained dofs to their prescribed values and is taken in full; later
  // ones use an Armijo backtracking line search.
  Eigen::VectorXd minimize_elastic(Eigen::VectorXd u, const Eigen::VectorXd& alpha,
                                   const std::vector<DirichletValue>& constraints, int& solves) {
    std::vector<DirichletValue> increments(constraints.size());
    bool constrained = false;
    for (int it = 0; it < config_.elastic_max_iterations; ++it) {
      const TensionPattern pattern = tension_pattern(disc_, params_, view(alpha), view(u));
      SparseSystem sys = assemble_elasticity(disc_, params_, view(alpha), pattern, view(u));
      const Eigen::VectorXd g = internal_force(disc_, params_, view(alpha), view(u));
      sys.rhs = -g;
      for (std::size_t i = 0; i < constraints.size(); ++i)
        increments[i] = {constraints[i].dof, constrained ? 0.0 : constraints[i].value - u(constraints[i].dof)};
      // dofs touching only fully broken material in tension carry no stiffness; hold them
      std::vector<DirichletValue> pinned = increments;
      const Eigen::VectorXd diag = sys.matrix.diagonal();
      const double scale = diag.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (std::abs(diag(i)) <= 1e-14 * scale) pinned.push_back({static_cast<int>(i), 0.0});
      apply_dirichlet(sys, pinned);
      const Eigen::VectorXd zero_guess = Eigen::VectorXd::Zero(u.size());
      const Eigen::VectorXd d = u_solver_.solve(sys.matrix, sys.rhs, &zero_guess);
      ++solves;

      double t = 1.0;
      // update at roundoff level: the line search below would only see noise
      if (constrained && d.norm() <= 1e-12 * u.norm()) break;
      if (!constrained) {
        u += d;
        for (const auto& c : constraints) u(c.dof) = c.value;
        constrained = true;
      } else {
        Eigen::VectorXd gf = g;
        for (const auto& c : constraints) gf(c.dof) = 0.0;
        const double slope = gf.dot(d);
        if (!(slope < 0.0)) break;
        const double w0 = stored_energy(disc_, params_, view(alpha), view(u));
        while (true) {
          const Eigen::VectorXd trial = u + t * d;
          if (stored_energy(disc_, params_, view(alpha), view(trial)) <= w0 + 1e-4 * t * slope) {
            u = trial;
            break;
          }
          t *= 0.5;
          if (t < 1e-10) return u;
        }
      }
      if (t == 1.0 && tension_pattern(disc_, params_, view(alpha), view(u)) == pattern) break;
    }
    return u;
  }

  const Discretization& disc_;
  const MaterialParams& params_;
  const StaggeredConfig& config_;
  LinearSolver u_solver_, a_solver_;
  double t_u_ = 0.0;
};

void check_state(const Discretization& disc, const FieldState& s) {
  if (static_cast<std::size_t>(s.u.size()) != disc.num_displacement_dofs() ||
      static_cast<std::size_t>(s.alpha.size()) != disc.num_nodes())
    throw SizeError("field state does not match the discretization");
  if (!s.u.allFinite() || !s.alpha.allFinite()) throw NumericalFailureError("non-finite values in the field state");
}

}  // namespace

StepResult staggered_step(const Discretization& disc, const MaterialParams& params, const FieldState& previous,
                          std::span<const DirichletCondition> bcs, const StaggeredConfig& config,
                          const std::optional<ReactionProbe>& probe) {
  params.validate();
  config.validate();
  check_state(disc, previous);
  Engine engine(disc, params, config);
  return engine.step(previous, bcs, probe);
}

LoadHistory run_load_program(const Discretization& disc, const MaterialParams& params,
                             const LoadProgram& program, const StaggeredConfig& config,
                             const RunObserver& observer) {
  params.validate();
  config.validate();
  LoadHistory history;
  FieldState state = FieldState::zero(disc);
  Engine engine(disc, params, config);
  const std::optional<ReactionProbe> probe =
      program.reaction_set.empty() ? std::nullopt
                                   : std::optional<ReactionProbe>(ReactionProbe{program.reaction_set,
                                                                                program.reaction_component});
  const auto n = static_cast<int>(program.steps.size());
  for (int i = 0; i < n; ++i) {
    const LoadStep& ls = program.steps[static_cast<std::size_t>(i)];
    StepResult res;
    try {
      res = engine.step(state, ls.conditions, probe);
    } catch (const std::exception& e) {
      history.failure = "step " + std::to_string(i + 1) + ": " + e.what();
      break;
    }
    StepRecord rec;
    rec.step = i + 1;
    rec.applied_displacement = ls.applied_displacement;
    rec.reaction = res.energy.reaction;
    rec.energy = res.energy;
    rec.iterations = res.iterations;
    rec.converged = res.converged;
    rec.half_step_energies = std::move(res.half_step_energies);
    rec.upper_bound_nodes = res.upper_bound_nodes;
    state = std::move(res.state);
    history.steps.push_back(rec);
    if (observer.on_step) observer.on_step(rec, state);
    const bool snap = (program.snapshot_every > 0 && rec.step % program.snapshot_every == 0) || i + 1 == n;
    if (snap && observer.on_snapshot) observer.on_snapshot(rec, state);
  }
  history.final_state = std::move(state);
  return history;
}

}  // namespace pff
