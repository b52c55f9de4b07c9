#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "occ/forest.hpp"
#include "occ/glmm.hpp"

namespace occ {

struct GmerfOptions {
  double tol = 1e-4;  // on the generalized log-likelihood
  int max_iter = 50;
  int patience = 5;   // stop after this many non-improving iterations
  LogitOptions logit;
};

struct GmerfFit {
  ForestModel forest;
  double sigma_z2 = 0;
  std::vector<int> group_ids;
  Eigen::VectorXd z;
  std::vector<double> trace;           // generalized log-likelihood per iteration
  std::vector<double> accepted_trace;  // improving iterations only
  bool converged = false;
  int iterations = 0;

  double z_for_group(int gid) const {
    auto it = std::lower_bound(group_ids.begin(), group_ids.end(), gid);
    if (it == group_ids.end() || *it != gid) return 0.0;
    return z[static_cast<Eigen::Index>(it - group_ids.begin())];
  }
};

// Forest fixed part plus random intercept on the logit scale, fit by
// penalized-quasi-likelihood alternation:
//   (a) working responses w = eta + (y - mu)/(mu(1-mu)) with weights mu(1-mu)
//   (b) forest refit on (w - z) to update f
//   (c) (z, sigma_z2) update with f as a fixed offset, via the mixed-logit
//       inner/outer machinery restricted to the random part
// Random effects start from the GLMM estimates. The best-likelihood iterate
// is returned; a non-improving streak stops early with converged = false.
inline GmerfFit fit_gmerf(const DesignMatrix& design, const GlmmFit& glmm_init,
                          const ForestParams& forest_params, const GmerfOptions& opt = {}) {
  const Eigen::Index n = design.y.size();
  if (n == 0) throw Error(ErrorKind::degenerate, "empty design");

  std::vector<int> gids(design.group);
  std::sort(gids.begin(), gids.end());
  gids.erase(std::unique(gids.begin(), gids.end()), gids.end());
  std::map<int, int> gidx;
  for (std::size_t i = 0; i < gids.size(); ++i) gidx[gids[i]] = static_cast<int>(i);
  const int J = static_cast<int>(gids.size());

  std::vector<int> group_row(n);
  for (Eigen::Index i = 0; i < n; ++i) group_row[i] = gidx[design.group[i]];

  GmerfFit fit;
  fit.group_ids = gids;
  fit.z.resize(J);
  for (int j = 0; j < J; ++j) fit.z[j] = glmm_init.z_for_group(gids[j]);
  fit.sigma_z2 = glmm_init.sigma_z2;

  mixed::Problem random_part;
  random_part.X.resize(n, 0);
  random_part.intercept = false;
  random_part.y = design.y;
  random_part.group_row = group_row;
  random_part.n_groups = J;

  Eigen::VectorXd f_pred = Eigen::VectorXd::Zero(n);
  double best_ll = -INFINITY, prev_ll = -INFINITY;
  ForestModel best_forest;
  Eigen::VectorXd best_z = fit.z;
  double best_sigma = fit.sigma_z2;
  int no_improve = 0;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    // (a) latent-scale working responses at the current full predictor
    Eigen::VectorXd eta(n), wts(n), target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double e = f_pred[i] + fit.z[group_row[i]];
      double mu = std::clamp(logistic(e), 1e-10, 1.0 - 1e-10);
      double w = mu * (1.0 - mu);
      eta[i] = e;
      wts[i] = w;
      target[i] = (e + (design.y[i] - mu) / w) - fit.z[group_row[i]];
    }

    // (b) refit the fixed part
    ForestParams fp = forest_params;
    fp.seed = fnv1a64_mix(forest_params.seed, static_cast<std::uint64_t>(iter) + 1);
    ForestModel forest = fit_forest(design.X, target, wts, fp);
    f_pred = forest.predict_matrix(design.X);

    // (c) random part given the forest offset
    random_part.offset = f_pred;
    mixed::OuterResult rp = mixed::outer_fit(random_part, opt.logit);
    fit.z = rp.state.z;
    fit.sigma_z2 = rp.sigma_z2;

    // (d) generalized log-likelihood of the full model
    double ll = rp.state.laplace_ll;
    fit.trace.push_back(ll);

    if (ll > best_ll) {
      best_ll = ll;
      best_forest = forest;
      best_z = fit.z;
      best_sigma = fit.sigma_z2;
      fit.accepted_trace.push_back(ll);
      no_improve = 0;
    } else {
      ++no_improve;
    }
    fit.iterations = iter + 1;
    if (iter > 0 && std::fabs(ll - prev_ll) < opt.tol) {
      fit.converged = true;
      break;
    }
    if (no_improve >= opt.patience) break;  // oscillating trace
    prev_ll = ll;
  }

  fit.forest = std::move(best_forest);
  fit.z = best_z;
  fit.sigma_z2 = best_sigma;
  return fit;
}

inline Eigen::VectorXd predict_gmerf(const GmerfFit& fit, const Eigen::MatrixXd& X,
                                     const std::vector<int>& groups) {
  if (X.rows() != static_cast<Eigen::Index>(groups.size()))
    throw Error(ErrorKind::internal, "rows/groups size mismatch");
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double f = fit.forest.predict(X.row(i));
    out[i] = logistic(f + fit.z_for_group(groups[static_cast<std::size_t>(i)]));
  }
  return out;
}

inline double pvre_gmerf(const GmerfFit& fit) { return pvre(fit.sigma_z2); }

}  // namespace occ
