/**
 * @file solver.hpp
 * @brief Direct solve of sparse symmetric indefinite systems with iterative refinement.
 *
 * Systems below the dense threshold use a full-pivoting dense LU; larger ones use
 * UMFPACK's sparse LU. Refinement steps x += K^{-1}(b - K x) are taken until the
 * relative residual meets the target.
 */
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

namespace nnelast {

using SparseMatrix = Eigen::SparseMatrix<double>;

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::optional<long> pivot, double residual)
      : std::runtime_error(what), pivot_(pivot), residual_(residual) {}

  /// Column of the offending pivot for factorization failures.
  std::optional<long> pivot() const { return pivot_; }
  /// Achieved relative residual for target misses; NaN otherwise.
  double residual() const { return residual_; }

 private:
  std::optional<long> pivot_;
  double residual_;
};

struct SolverOptions {
  double target_residual{1e-10};
  int max_refinement_steps{10};
  long dense_threshold{500};
};

struct SolveResult {
  Eigen::VectorXd x;
  std::string backend;
  int refinement_steps{0};
  double residual{0.0};  ///< ||K x - b|| / ||b||
};

namespace detail {

template <class Factor>
SolveResult refine(const SparseMatrix& K, const Eigen::VectorXd& b, const Factor& solve, const SolverOptions& opt,
                   std::string backend) {
  SolveResult r;
  r.backend = std::move(backend);
  const double bn = b.norm();
  r.x = solve(b);
  Eigen::VectorXd res = b - K * r.x;
  r.residual = res.norm() / bn;
  while (!(r.residual <= opt.target_residual) && r.refinement_steps < opt.max_refinement_steps) {
    r.x += solve(res);
    res = b - K * r.x;
    const double next = res.norm() / bn;
    ++r.refinement_steps;
    if (!(next < r.residual)) {
      r.residual = next;
      break;
    }
    r.residual = next;
  }
  if (!(r.residual <= opt.target_residual)) {
    std::ostringstream msg;
    msg << "solver missed the residual target " << opt.target_residual << ": achieved " << r.residual << " after "
        << r.refinement_steps << " refinement steps (" << r.backend << ")";
    throw SolverError(msg.str(), std::nullopt, r.residual);
  }
  return r;
}

}  // namespace detail

inline SolveResult solve_symmetric_indefinite(const SparseMatrix& K, const Eigen::VectorXd& b,
                                              const SolverOptions& opt = {}) {
  const long n = K.rows();
  if (K.cols() != n || b.size() != n) throw std::invalid_argument("solve_symmetric_indefinite: dimension mismatch");
  if (n == 0) return {};
  if (b.norm() == 0.0) return {Eigen::VectorXd::Zero(n), "trivial", 0, 0.0};

  if (n < opt.dense_threshold) {
    const Eigen::MatrixXd D(K);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    if (!lu.isInvertible()) {
      const long pivot = lu.permutationQ().indices()(lu.rank());
      throw SolverError("singular matrix: dense LU rank " + std::to_string(lu.rank()) + " of " + std::to_string(n) +
                            ", first vanishing pivot at column " + std::to_string(pivot),
                        pivot, std::numeric_limits<double>::quiet_NaN());
    }
    return detail::refine(K, b, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return lu.solve(r); }, opt,
                          "dense-lu");
  }

  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) {
    std::optional<long> pivot;
    try {
      const auto U = lu.matrixU();
      const auto Q = lu.permutationQ();
      long worst = 0;
      double smallest = std::numeric_limits<double>::infinity();
      for (long k = 0; k < U.rows(); ++k) {
        const double d = std::abs(U.coeff(k, k));
        if (d < smallest) {
          smallest = d;
          worst = k;
        }
      }
      pivot = Q(worst);
    } catch (...) {
    }
    throw SolverError("sparse LU factorization failed (singular or ill-conditioned matrix)" +
                          (pivot ? ", smallest pivot at column " + std::to_string(*pivot) : std::string{}),
                      pivot, std::numeric_limits<double>::quiet_NaN());
  }
  return detail::refine(K, b, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return lu.solve(r); }, opt,
                        "umfpack");
}

}  // namespace nnelast
