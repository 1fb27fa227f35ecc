#ifndef RFIELD_LOWRANK_HPP
#define RFIELD_LOWRANK_HPP

#include "rfield/sgalerkin.hpp"

namespace rfield::lowrank {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct AlsOptions {
  int max_sweeps = 40;
  double tol = 1e-8; // relative J decrease per sweep
  int max_restarts = 3;
};

struct GreedyOptions {
  int max_rank = 10;
  double tol = 1e-6; // relative J decrease per enrichment
  std::uint64_t seed = 1;
  int update_cycles = 2; // block-update passes after each enrichment
  AlsOptions als;
};

/// One rank-one correction minimizing J(current + wx (x) wy (x) wz) by
/// alternating exact factor solves. Factors wy, wz are kept unit-norm, the
/// magnitude lives in wx. Zero factors trigger a seeded restart (up to
/// max_restarts, then the best found is returned).
sg::CpTerm als_rank_one(const sg::GalerkinProblem& problem,
                        const MatrixXd& current, const AlsOptions& opts,
                        std::uint64_t seed);

struct GreedyResult {
  std::vector<sg::CpTerm> terms;
  MatrixXd dense;                 // accumulated coefficient tensor
  std::vector<double> j_history;  // J after each enrichment, nonincreasing
  std::vector<double> residual_history; // relative coupled residual
};

/// Greedy canonical approximation: u^{k+1} = u^k + (rank-one minimizer).
/// Stops when the relative J decrease drops below tol or rank hits max_rank.
GreedyResult greedy_solve(const sg::GalerkinProblem& problem,
                          const GreedyOptions& opts);

} // namespace rfield::lowrank

#endif
