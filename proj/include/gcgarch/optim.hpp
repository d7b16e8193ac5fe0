#pragma once

#include <Eigen/Core>
#include <functional>

namespace gcg {

struct NelderMeadOptions {
  int max_evals = 4000;
  double f_tol = 1e-10;  // absolute spread of simplex values
  double x_tol = 1e-9;   // max coordinate spread of the simplex
  int restarts = 1;      // re-run from the incumbent with fresh steps
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Derivative-free minimization. Deterministic for fixed inputs.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& opts = {});

}  // namespace gcg
