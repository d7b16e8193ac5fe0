#include "gcgarch/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gcgarch/error.hpp"

namespace gcg {

namespace {

NelderMeadResult nm_once(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                         const NelderMeadOptions& opts, int* evals) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  auto eval = [&](const Eigen::VectorXd& x) {
    ++*evals;
    const double val = f(x);
    return std::isfinite(val) ? val : 1e100;
  };
  for (int i = 1; i <= n; ++i) pts[i](i - 1) += step(i - 1);
  for (int i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

  std::vector<int> idx(n + 1);
  NelderMeadResult res;
  while (*evals < opts.max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = idx[0], worst = idx[n], second = idx[n - 1];

    double spread = 0.0;
    for (int i = 0; i <= n; ++i) {
      spread = std::max(spread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    }
    if (fv[worst] - fv[best] <= opts.f_tol && spread <= opts.x_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= n;

    const Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
    const double fr = eval(refl);
    if (fr < fv[best]) {
      const Eigen::VectorXd expd = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expd);
      if (fe < fr) {
        pts[worst] = expd;
        fv[worst] = fe;
      } else {
        pts[worst] = refl;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = refl;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd contr =
          outside ? centroid + 0.5 * (refl - centroid) : centroid + 0.5 * (pts[worst] - centroid);
      const double fc = eval(contr);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = contr;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          fv[i] = eval(pts[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = pts[best];
  res.f = fv[best];
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& opts) {
  if (x0.size() == 0) throw Error(Error::Code::invalid_argument, "nelder_mead: empty start point");
  if (step.size() != x0.size()) throw Error(Error::Code::invalid_argument, "nelder_mead: step size mismatch");
  int evals = 0;
  NelderMeadResult best = nm_once(f, x0, step, opts, &evals);
  for (int r = 0; r < opts.restarts && evals < opts.max_evals; ++r) {
    NelderMeadResult again = nm_once(f, best.x, step * 0.1, opts, &evals);
    if (again.f < best.f) {
      again.evals = evals;
      again.converged = again.converged || best.converged;
      best = again;
    }
  }
  best.evals = evals;
  return best;
}

}  // namespace gcg
