#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SparseCholesky>
#ifdef PFF_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "pff/errors.hpp"
#include "pff/solver.hpp"

namespace pff {

struct LinearSolver::Factorization {
#ifdef PFF_HAVE_CHOLMOD
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> llt;
#else
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
#endif
  std::vector<int> outer, inner;
  bool analyzed = false;
  bool factored = false;

  bool same_pattern(const SparseMatrix& m) const {
    return analyzed && outer.size() == static_cast<std::size_t>(m.outerSize() + 1) &&
           inner.size() == static_cast<std::size_t>(m.nonZeros()) &&
           std::equal(outer.begin(), outer.end(), m.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), m.innerIndexPtr());
  }
};

LinearSolver::LinearSolver(LinearSolverOptions options) : options_(options) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

namespace {

Eigen::VectorXd conjugate_gradient(const SparseMatrix& a, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd* guess, const LinearSolverOptions& opt,
                                   int& iterations) {
  const Eigen::Index n = a.rows();
  const Eigen::VectorXd diag = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(diag(i) > 0.0))
      throw SolverError("CG: non-positive diagonal entry at row " + std::to_string(i) +
                        "; the matrix is singular or indefinite");
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  Eigen::VectorXd x = guess && guess->size() == n ? *guess : Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  iterations = 0;
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);

  Eigen::VectorXd r = b - a * x;
  std::vector<double> history{r.norm() / bnorm};
  if (history.back() <= opt.tolerance) return x;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const int max_it = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * n);
  Eigen::VectorXd ap(n);
  for (int it = 1; it <= max_it; ++it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0))
      throw SolverError("CG breakdown: p^T A p = " + std::to_string(pap) + " at iteration " +
                            std::to_string(it) + "; the matrix is singular or indefinite",
                        history);
    const double step = rz / pap;
    x += step * p;
    r -= step * ap;
    history.push_back(r.norm() / bnorm);
    iterations = it;
    if (history.back() <= opt.tolerance) return x;
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("CG did not converge in " + std::to_string(max_it) + " iterations (relative residual " +
                        std::to_string(history.back()) + ")",
                    history);
}

}  // namespace

namespace {

// CG preconditioned by a factorization of a nearby matrix. Returns false
// when the target is not reached in `max_it` iterations or on breakdown.
template <class Factor>
bool factor_preconditioned_cg(const SparseMatrix& a, const Eigen::VectorXd& b, const Factor& m, double tol,
                              int max_it, Eigen::VectorXd& x, int& iterations) {
  const double bnorm = b.norm();
  x = m.solve(b);
  iterations = 0;
  if (bnorm == 0.0) {
    x.setZero();
    return true;
  }
  Eigen::VectorXd r = b - a * x;
  if (r.norm() <= tol * bnorm) return true;
  Eigen::VectorXd z = m.solve(r);
  Eigen::VectorXd p = z, ap(b.size());
  double rz = r.dot(z);
  for (int it = 1; it <= max_it; ++it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0) || !(rz > 0.0)) return false;
    const double step = rz / pap;
    x += step * p;
    r -= step * ap;
    iterations = it;
    if (r.norm() <= tol * bnorm) return true;
    z = m.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return false;
}

}  // namespace

Eigen::VectorXd LinearSolver::solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                    const Eigen::VectorXd* guess) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
    throw SizeError("linear system dimensions do not match");
  last_iterations_ = 0;
  if (matrix.rows() == 0) return Eigen::VectorXd();
  Eigen::VectorXd x;
  if (options_.kind == LinearSolverKind::Cg) {
    x = conjugate_gradient(matrix, rhs, guess, options_, last_iterations_);
  } else {
    if (!factor_) {
      factor_ = std::make_unique<Factorization>();
#ifdef PFF_HAVE_CHOLMOD
      factor_->llt.cholmod().print = 0;
#endif
    }
    Factorization& f = *factor_;
    if (!matrix.isCompressed()) throw SolverError("direct solver expects a compressed matrix");
    bool done = false;
    if (f.same_pattern(matrix)) {
      if (options_.reuse_factorization && f.factored)
        done = factor_preconditioned_cg(matrix, rhs, f.llt, options_.reuse_tolerance, options_.reuse_max_iterations,
                                        x, last_iterations_) &&
               x.allFinite();
    } else {
      f.llt.analyzePattern(matrix);
      f.outer.assign(matrix.outerIndexPtr(), matrix.outerIndexPtr() + matrix.outerSize() + 1);
      f.inner.assign(matrix.innerIndexPtr(), matrix.innerIndexPtr() + matrix.nonZeros());
      f.analyzed = true;
    }
    if (!done) {
      f.factored = false;
      f.llt.factorize(matrix);
      ++factorizations_;
      if (f.llt.info() != Eigen::Success)
        throw SolverError("Cholesky factorization failed; the matrix is singular or indefinite");
      f.factored = true;
      last_iterations_ = 0;
      x = f.llt.solve(rhs);
      if (f.llt.info() != Eigen::Success) throw SolverError("Cholesky solve failed");
    }
  }
  if (!x.allFinite()) throw SolverError("linear solve produced non-finite values");
  return x;
}

Eigen::VectorXd solve_linear(const SparseSystem& system, const LinearSolverOptions& options) {
  LinearSolver solver(options);
  return solver.solve(system.matrix, system.rhs);
}

Eigen::VectorXd enforce_irreversibility(const Eigen::VectorXd& candidate, const Eigen::VectorXd& previous) {
  if (candidate.size() != previous.size()) throw SizeError("damage vectors differ in length");
  return candidate.cwiseMax(previous).cwiseMax(0.0).cwiseMin(1.0);
}

namespace {

// Projected-gradient stationarity measure (scaled by the diagonal).
double kkt_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& diag,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double y = std::clamp(x(i) - g(i) / diag(i), lo(i), hi(i));
    r = std::max(r, std::abs(y - x(i)));
  }
  return r;
}

}  // namespace

Eigen::VectorXd solve_bound_constrained(const SparseSystem& system, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper, const Eigen::VectorXd& initial,
                                        LinearSolver& reduced_solver, BoundSolveStats* stats) {
  const SparseMatrix& a = system.matrix;
  const Eigen::VectorXd& b = system.rhs;
  const Eigen::Index n = a.rows();
  if (lower.size() != n || upper.size() != n || initial.size() != n || b.size() != n)
    throw SizeError("bound-constrained system dimensions do not match");
  const Eigen::VectorXd diag = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(diag(i) > 0.0)) throw SolverError("bound-constrained solve: non-positive diagonal");

  BoundSolveStats local;
  BoundSolveStats& st = stats ? *stats : local;
  st = {};

  Eigen::VectorXd x = initial.cwiseMax(lower).cwiseMin(upper);
  Eigen::VectorXd g = a * x - b;
  // -1 at lower bound, 0 free, +1 at upper bound
  std::vector<signed char> state(static_cast<std::size_t>(n), 2), next(static_cast<std::size_t>(n));
  std::vector<int> local_index(static_cast<std::size_t>(n));
  constexpr int kMaxActiveSetIterations = 60;

  for (int it = 1; it <= kMaxActiveSetIterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = x(i) - g(i) / diag(i);
      next[static_cast<std::size_t>(i)] = y <= lower(i) ? -1 : (y >= upper(i) ? 1 : 0);
    }
    if (next == state) {
      st.converged = true;
      break;
    }
    state = next;
    st.active_set_iterations = it;

    std::vector<int> free;
    Eigen::VectorXd fixed_part = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto s = state[static_cast<std::size_t>(i)];
      if (s == 0) {
        local_index[static_cast<std::size_t>(i)] = static_cast<int>(free.size());
        free.push_back(static_cast<int>(i));
      } else {
        local_index[static_cast<std::size_t>(i)] = -1;
        x(i) = s < 0 ? lower(i) : upper(i);
        fixed_part(i) = x(i);
      }
    }
    if (!free.empty()) {
      const Eigen::VectorXd coupled = a * fixed_part;
      const auto m = static_cast<Eigen::Index>(free.size());
      SparseMatrix reduced(m, m);
      std::vector<Eigen::Triplet<double>> trips;
      Eigen::VectorXd rhs(m), guess(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const int j = free[static_cast<std::size_t>(k)];
        rhs(k) = b(j) - coupled(j);
        guess(k) = x(j);
        for (SparseMatrix::InnerIterator itr(a, j); itr; ++itr) {
          const int li = local_index[static_cast<std::size_t>(itr.row())];
          if (li >= 0) trips.emplace_back(li, k, itr.value());
        }
      }
      reduced.setFromTriplets(trips.begin(), trips.end());
      reduced.makeCompressed();
      const Eigen::VectorXd xf = reduced_solver.solve(reduced, rhs, &guess);
      for (Eigen::Index k = 0; k < m; ++k) x(free[static_cast<std::size_t>(k)]) = xf(k);
    }
    g = a * x - b;
  }

  const bool feasible = ((x - lower).minCoeff() >= 0.0) && ((upper - x).minCoeff() >= 0.0);
  if (!st.converged || !feasible) {
    // projected Gauss-Seidel from the clamped iterate
    x = x.cwiseMax(lower).cwiseMin(upper);
    g = a * x - b;
    constexpr int kMaxSweeps = 20000;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double ri = b(i);
        for (SparseMatrix::InnerIterator itr(a, i); itr; ++itr) ri -= itr.value() * x(itr.row());
        x(i) = std::clamp(x(i) + ri / diag(i), lower(i), upper(i));
      }
      st.fallback_sweeps = sweep;
      if (sweep % 10 == 0) {
        g = a * x - b;
        if (kkt_residual(x, g, diag, lower, upper) < 1e-12) {
          st.converged = true;
          break;
        }
      }
    }
  }
  st.at_upper_bound = static_cast<int>((x.array() >= upper.array()).count());
  return x;
}

}  // namespace pff
