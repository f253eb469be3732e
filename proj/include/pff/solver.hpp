#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pff/assembly.hpp"
#include "pff/material.hpp"

namespace pff {

// ---------------------------------------------------------------- linear solves

enum class LinearSolverKind { Cg, Direct };

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::Cg;
  /// Relative residual target for CG.
  double tolerance = 1e-10;
  /// CG iteration cap; 0 means 10 * n.
  int max_iterations = 0;
  /// Direct only: for a matrix with the pattern of the last factorization,
  /// first try CG preconditioned by that (stale) factor; refactorize if it
  /// does not reach `reuse_tolerance` within `reuse_max_iterations`.
  bool reuse_factorization = true;
  double reuse_tolerance = 1e-12;
  int reuse_max_iterations = 20;
};

/// Solves a symmetric positive definite system. CG uses a Jacobi
/// preconditioner; Direct uses a sparse Cholesky factorization whose symbolic
/// analysis is reused while the sparsity pattern is unchanged.
class LinearSolver {
public:
  explicit LinearSolver(LinearSolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws SolverError on breakdown, indefiniteness or non-convergence.
  Eigen::VectorXd solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                        const Eigen::VectorXd* guess = nullptr);
  const LinearSolverOptions& options() const { return options_; }
  /// Iterations of the last CG solve (0 for fresh factorizations).
  int last_iterations() const { return last_iterations_; }
  /// Numeric factorizations performed so far (direct solver).
  int factorizations() const { return factorizations_; }

private:
  struct Factorization;
  LinearSolverOptions options_;
  std::unique_ptr<Factorization> factor_;
  int last_iterations_ = 0;
  int factorizations_ = 0;
};

Eigen::VectorXd solve_linear(const SparseSystem& system, const LinearSolverOptions& options = {});

struct BoundSolveStats {
  int active_set_iterations = 0;
  int fallback_sweeps = 0;
  int at_upper_bound = 0;
  bool converged = false;
};

/// Minimizes 1/2 x^T A x - b^T x subject to lower <= x <= upper (A symmetric
/// positive definite) with a primal-dual active set method; projected
/// Gauss-Seidel takes over if the active set cycles.
Eigen::VectorXd solve_bound_constrained(const SparseSystem& system, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper, const Eigen::VectorXd& initial,
                                        LinearSolver& reduced_solver, BoundSolveStats* stats = nullptr);

/// max(candidate, previous) per node, then clamped to [0,1].
Eigen::VectorXd enforce_irreversibility(const Eigen::VectorXd& candidate, const Eigen::VectorXd& previous);

// ---------------------------------------------------------------- staggered scheme

/// How the damage half-step handles the constraints previous <= alpha <= 1.
enum class DamageSolveMode {
  /// Exact minimization over the admissible box.
  BoundConstrained,
  /// Unconstrained linear solve followed by enforce_irreversibility.
  Projection,
};

/// Lower bound used inside a load step.
enum class IrreversibilityMode {
  /// Previous staggered iterate (no healing between alternations).
  Inner,
  /// Converged damage of the previous load step.
  Step,
};

struct StaggeredConfig {
  /// Displacement tolerance (2-norm of iterate difference); <= 0 selects 1e-6 * mesh diameter.
  double t_u = 0.0;
  /// Damage tolerance (max-norm of iterate difference).
  double t_d = 1e-4;
  int k_max = 500;
  /// Divide the iterate differences by the norm of the current iterate.
  bool relative_norms = false;
  DamageSolveMode damage_mode = DamageSolveMode::BoundConstrained;
  IrreversibilityMode irreversibility = IrreversibilityMode::Step;
  /// Newton updates of the tension/compression branch per elastic half-step;
  /// 1 keeps the branch of the previous iterate (single linear solve).
  int elastic_max_iterations = 25;
  /// Over-relaxation: after each damage half-step from the second iteration on,
  /// try (u, alpha) + w times the last iteration's update (alpha clipped to the
  /// bounds) for w = this value, w/2, ... >= 0.5, keeping the first trial that
  /// lowers the total energy. 0 disables.
  double extrapolation = 0.0;
  LinearSolverOptions elasticity_solver{};
  LinearSolverOptions damage_solver{};

  void validate() const;
};

struct DirichletCondition {
  std::string set;
  int component = 0;
  double value = 0.0;
};

struct LoadStep {
  std::vector<DirichletCondition> conditions;
  /// Controlling displacement reported in the curves (mm).
  double applied_displacement = 0.0;
};

struct LoadProgram {
  std::vector<LoadStep> steps;
  /// Boundary set and component whose reaction force is recorded.
  std::string reaction_set;
  int reaction_component = 0;
  /// Snapshot every n steps (0 disables).
  int snapshot_every = 0;

  /// Steps increment, 2*increment, ... up to `final_value` on `loaded_set`,
  /// with the `fixed` conditions repeated in every step.
  static LoadProgram monotonic(const std::vector<DirichletCondition>& fixed, const std::string& loaded_set,
                               int component, double increment, double final_value);
};

struct EnergyReport {
  double elastic = 0.0;
  double dissipated = 0.0;
  double total = 0.0;
  double reaction = 0.0;
};

struct FieldState {
  Eigen::VectorXd u;
  Eigen::VectorXd alpha;

  static FieldState zero(const Discretization& disc);
};

struct StepResult {
  FieldState state;
  int iterations = 0;
  bool converged = false;
  EnergyReport energy;
  /// Total energy after every half-step (elastic, damage, elastic, ...).
  std::vector<double> half_step_energies;
  /// Nodes at alpha = 1 after the last damage half-step (clamped in projection mode).
  int upper_bound_nodes = 0;
  int elastic_solves = 0;
};

struct ReactionProbe {
  std::string set;
  int component = 0;
};

/// Alternates exact elastic and damage minimizations until both tolerances
/// hold or k_max is reached (returned with converged = false).
StepResult staggered_step(const Discretization& disc, const MaterialParams& params,
                          const FieldState& previous, std::span<const DirichletCondition> bcs,
                          const StaggeredConfig& config,
                          const std::optional<ReactionProbe>& probe = std::nullopt);

EnergyReport compute_energies(const Discretization& disc, const MaterialParams& params,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& alpha);

struct StepRecord {
  int step = 0;  // 1-based
  double applied_displacement = 0.0;
  double reaction = 0.0;
  EnergyReport energy;
  int iterations = 0;
  bool converged = false;
  std::vector<double> half_step_energies;
  int upper_bound_nodes = 0;
};

struct LoadHistory {
  std::vector<StepRecord> steps;
  FieldState final_state;
  /// Set when a step threw; `steps` then holds the completed prefix.
  std::optional<std::string> failure;

  bool all_converged() const;
};

struct RunObserver {
  /// Called after every completed step.
  std::function<void(const StepRecord&, const FieldState&)> on_step;
  /// Called on the snapshot cadence and after the last step.
  std::function<void(const StepRecord&, const FieldState&)> on_snapshot;
};

LoadHistory run_load_program(const Discretization& disc, const MaterialParams& params,
                             const LoadProgram& program, const StaggeredConfig& config,
                             const RunObserver& observer = {});

}  // namespace pff
