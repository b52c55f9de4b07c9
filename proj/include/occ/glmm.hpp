#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occ/common.hpp"
#include "occ/features.hpp"
#include "occ/mathutil.hpp"

namespace occ {

struct LogitOptions {
  double inner_tol = 1e-8;  // relative penalized-deviance change
  int max_inner = 200;
  double outer_tol = 1e-6;  // on log sigma_z2
  int max_outer_evals = 50;
  double log_s2_lo = -12.0;
  double log_s2_hi = 6.0;
  std::optional<double> fix_sigma_z2;
  double ci_lo = 0.05;  // Wald CI quantile pair (Table-4 style 90% band)
  double ci_hi = 0.95;
};

struct FitDiagnostics {
  bool ridge_used = false;
  bool quasi_separation = false;
  std::vector<double> outer_trace;  // accepted (improving) Laplace log-likelihoods
  std::vector<std::string> notes;
};

struct GlmmFit {
  Eigen::VectorXd beta;      // fixed effects, intercept first
  Eigen::MatrixXd beta_cov;  // covariance of beta (intercept included)
  double sigma_z2 = 0;
  std::vector<int> group_ids;  // sorted distinct segment ids
  Eigen::VectorXd z;           // posterior modes, aligned with group_ids
  double loglik = NAN;         // Laplace-approximated marginal log-likelihood
  bool converged = false;
  int inner_iterations = 0;
  int outer_evaluations = 0;
  FitDiagnostics diagnostics;

  double z_for_group(int gid) const {
    auto it = std::lower_bound(group_ids.begin(), group_ids.end(), gid);
    if (it == group_ids.end() || *it != gid) return 0.0;  // unseen group
    return z[static_cast<Eigen::Index>(it - group_ids.begin())];
  }
};

namespace mixed {

// Bernoulli-logit problem with an optional fixed-effect block (intercept +
// columns) plus a per-row offset and one scalar random intercept per group.
// The same machinery drives the GLMM fit and the random-part updates of the
// forest alternation.
struct Problem {
  Eigen::MatrixXd X;           // may have zero columns
  bool intercept = true;
  Eigen::VectorXd y;
  Eigen::VectorXd offset;      // zero-length means no offset
  std::vector<int> group_row;  // per row, 0-based group index
  int n_groups = 0;
};

struct State {
  Eigen::VectorXd theta;  // [intercept?, beta..., ] fixed part only
  Eigen::VectorXd z;
  Eigen::VectorXd eta;
  double penalized_deviance = INFINITY;
  double laplace_ll = -INFINITY;
  Eigen::MatrixXd fixed_info_inv;  // Schur-complement inverse at the optimum
  Eigen::VectorXd group_w;         // summed IRLS weights per group at the optimum
  int iterations = 0;
  bool converged = false;
  bool ridge_used = false;
};

inline double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
  return ll;
}

inline Eigen::VectorXd linear_predictor(const Problem& p, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& z) {
  const Eigen::Index n = p.y.size();
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  if (p.offset.size() == n) eta = p.offset;
  Eigen::Index k = 0;
  if (p.intercept) {
    eta.array() += theta[0];
    k = 1;
  }
  if (p.X.cols() > 0) eta += p.X * theta.segment(k, p.X.cols());
  for (Eigen::Index i = 0; i < n; ++i) eta[i] += z[p.group_row[i]];
  return eta;
}

inline double penalized_deviance(const Problem& p, const Eigen::VectorXd& eta,
                                 const Eigen::VectorXd& z, double sigma_z2) {
  double dev = -2.0 * bernoulli_loglik(p.y, eta);
  if (sigma_z2 > 0) dev += z.squaredNorm() / sigma_z2;
  return dev;
}

// One joint penalized-IRLS solve over (theta, z) at fixed sigma_z2, started
// from the state passed in. sigma_z2 == 0 pins z at zero.
inline State inner_fit(const Problem& p, double sigma_z2, State start, const LogitOptions& opt) {
  const Eigen::Index n = p.y.size();
  const Eigen::Index pf = (p.intercept ? 1 : 0) + p.X.cols();
  const int J = p.n_groups;
  State s = std::move(start);
  if (s.theta.size() != pf) s.theta = Eigen::VectorXd::Zero(pf);
  if (s.z.size() != J) s.z = Eigen::VectorXd::Zero(J);
  if (sigma_z2 <= 0) s.z.setZero();

  s.eta = linear_predictor(p, s.theta, s.z);
  s.penalized_deviance = penalized_deviance(p, s.eta, s.z, sigma_z2);
  s.converged = false;

  Eigen::VectorXd mu(n), w(n), u(n);
  Eigen::MatrixXd Sxx(pf, pf);
  Eigen::VectorXd rhs_x(pf);
  Eigen::MatrixXd Sxz(pf, J);
  Eigen::VectorXd Szz(J), rhs_z(J);

  int it = 0;
  for (; it < opt.max_inner; ++it) {
    // IRLS weights and working response for the (theta, z) part
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = std::clamp(logistic(s.eta[i]), 1e-10, 1.0 - 1e-10);
      mu[i] = m;
      w[i] = m * (1.0 - m);
      double base = p.offset.size() == n ? p.offset[i] : 0.0;
      u[i] = (s.eta[i] - base) + (p.y[i] - m) / w[i];
    }

    Sxx.setZero();
    rhs_x.setZero();
    Sxz.setZero();
    Szz.setZero();
    rhs_z.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = p.group_row[i];
      Szz[g] += w[i];
      rhs_z[g] += w[i] * u[i];
      if (pf > 0) {
        Eigen::VectorXd xi(pf);
        Eigen::Index k = 0;
        if (p.intercept) xi[k++] = 1.0;
        for (Eigen::Index c = 0; c < p.X.cols(); ++c) xi[k + c] = p.X(i, c);
        Sxx.noalias() += w[i] * xi * xi.transpose();
        rhs_x.noalias() += (w[i] * u[i]) * xi;
        Sxz.col(g).noalias() += w[i] * xi;
      }
    }

    Eigen::VectorXd theta_new = s.theta;
    Eigen::VectorXd z_new = s.z;
    if (sigma_z2 > 0) {
      Eigen::VectorXd Mzz = Szz.array() + 1.0 / sigma_z2;
      if (pf > 0) {
        Eigen::MatrixXd S = Sxx;
        Eigen::VectorXd r = rhs_x;
        for (int g = 0; g < J; ++g) {
          S.noalias() -= (Sxz.col(g) * Sxz.col(g).transpose()) / Mzz[g];
          r.noalias() -= Sxz.col(g) * (rhs_z[g] / Mzz[g]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
        theta_new = ldlt.solve(r);
        if (!theta_new.allFinite()) {
          double ridge = 1e-8 * (S.trace() / static_cast<double>(pf) + 1.0);
          S.diagonal().array() += ridge;
          theta_new = S.ldlt().solve(r);
          s.ridge_used = true;
        }
      }
      for (int g = 0; g < J; ++g) {
        double dot = pf > 0 ? Sxz.col(g).dot(theta_new) : 0.0;
        z_new[g] = (rhs_z[g] - dot) / Mzz[g];
      }
    } else {
      if (pf > 0) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Sxx);
        theta_new = ldlt.solve(rhs_x);
        if (!theta_new.allFinite()) {
          double ridge = 1e-8 * (Sxx.trace() / static_cast<double>(pf) + 1.0);
          Eigen::MatrixXd S2 = Sxx;
          S2.diagonal().array() += ridge;
          theta_new = S2.ldlt().solve(rhs_x);
          s.ridge_used = true;
        }
      }
      z_new.setZero();
    }

    // step-halving on penalized deviance
    double step = 1.0;
    Eigen::VectorXd theta_try, z_try, eta_try;
    double dev_try = INFINITY;
    for (int h = 0; h < 30; ++h) {
      theta_try = s.theta + step * (theta_new - s.theta);
      z_try = s.z + step * (z_new - s.z);
      eta_try = linear_predictor(p, theta_try, z_try);
      dev_try = penalized_deviance(p, eta_try, z_try, sigma_z2);
      if (dev_try <= s.penalized_deviance + 1e-12) break;
      step *= 0.5;
    }
    double prev = s.penalized_deviance;
    s.theta = theta_try;
    s.z = z_try;
    s.eta = eta_try;
    s.penalized_deviance = dev_try;
    if (std::fabs(prev - dev_try) / (std::fabs(dev_try) + 0.1) < opt.inner_tol) {
      s.converged = true;
      ++it;
      break;
    }
  }
  s.iterations = it;

  // weights and information blocks at the final iterate
  Eigen::VectorXd wf(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = std::clamp(logistic(s.eta[i]), 1e-10, 1.0 - 1e-10);
    wf[i] = m * (1.0 - m);
  }
  s.group_w = Eigen::VectorXd::Zero(J);
  for (Eigen::Index i = 0; i < n; ++i) s.group_w[p.group_row[i]] += wf[i];

  if (pf > 0) {
    Sxx.setZero();
    Sxz.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd xi(pf);
      Eigen::Index k = 0;
      if (p.intercept) xi[k++] = 1.0;
      for (Eigen::Index c = 0; c < p.X.cols(); ++c) xi[k + c] = p.X(i, c);
      Sxx.noalias() += wf[i] * xi * xi.transpose();
      Sxz.col(p.group_row[i]).noalias() += wf[i] * xi;
    }
    Eigen::MatrixXd S = Sxx;
    if (sigma_z2 > 0) {
      for (int g = 0; g < J; ++g)
        S.noalias() -= (Sxz.col(g) * Sxz.col(g).transpose()) / (s.group_w[g] + 1.0 / sigma_z2);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(pf, pf));
    if (!inv.allFinite()) {
      S.diagonal().array() += 1e-8 * (S.trace() / static_cast<double>(pf) + 1.0);
      inv = S.ldlt().solve(Eigen::MatrixXd::Identity(pf, pf));
      s.ridge_used = true;
    }
    s.fixed_info_inv = inv;
  }

  // Laplace-approximated marginal log-likelihood
  double ll = bernoulli_loglik(p.y, s.eta);
  if (sigma_z2 > 0) {
    ll -= s.z.squaredNorm() / (2.0 * sigma_z2);
    for (int g = 0; g < J; ++g) ll -= 0.5 * std::log1p(sigma_z2 * s.group_w[g]);
  }
  s.laplace_ll = ll;
  return s;
}

struct OuterResult {
  State state;
  double sigma_z2 = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> accepted_trace;
};

// Profile the Laplace log-likelihood over log sigma_z2: coarse bracket, then
// golden-section, then one parabolic refinement through the final triple.
inline OuterResult outer_fit(const Problem& p, const LogitOptions& opt) {
  OuterResult out;
  if (opt.fix_sigma_z2) {
    out.sigma_z2 = *opt.fix_sigma_z2;
    out.state = inner_fit(p, out.sigma_z2, State{}, opt);
    out.evaluations = 1;
    out.converged = out.state.converged;
    out.accepted_trace.push_back(out.state.laplace_ll);
    return out;
  }

  State warm;
  int evals = 0;
  double best_ll = -INFINITY, best_t = opt.log_s2_lo;
  State best_state;
  auto eval = [&](double t) {
    warm = inner_fit(p, std::exp(t), warm, opt);
    ++evals;
    if (warm.laplace_ll > best_ll) {
      best_ll = warm.laplace_ll;
      best_t = t;
      best_state = warm;
      out.accepted_trace.push_back(best_ll);
    }
    return warm.laplace_ll;
  };

  const double coarse_step = 2.0;
  std::map<double, double> seen;
  for (double t = opt.log_s2_lo; t <= opt.log_s2_hi + 1e-9; t += coarse_step)
    seen[t] = eval(t);

  double a = std::max(best_t - coarse_step, opt.log_s2_lo);
  double b = std::min(best_t + coarse_step, opt.log_s2_hi);
  double fa = seen.count(a) ? seen[a] : eval(a);
  double fb = seen.count(b) ? seen[b] : eval(b);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > opt.outer_tol && evals < opt.max_outer_evals - 1) {
    if (fc > fd) {
      b = d;
      fb = fd;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      fa = fc;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
  }
  // one parabolic refinement through (a, m, b) with m = better interior point
  if (evals < opt.max_outer_evals && b > a) {
    double m = fc > fd ? c : d;
    double fm = std::max(fc, fd);
    double num = (m - a) * (m - a) * (fm - fb) - (m - b) * (m - b) * (fm - fa);
    double den = (m - a) * (fm - fb) - (m - b) * (fm - fa);
    if (std::fabs(den) > 1e-300) {
      double xv = m - 0.5 * num / den;
      if (xv > a && xv < b && std::fabs(xv - best_t) > 1e-12) eval(xv);
    }
  }

  out.state = best_state;
  out.sigma_z2 = std::exp(best_t);
  out.evaluations = evals;
  out.converged = best_state.converged && (b - a) <= std::max(opt.outer_tol * 16, 1e-4);
  return out;
}

}  // namespace mixed

// Fit the Bernoulli-logit mixed model with a per-segment random intercept by
// maximizing the Laplace-approximated marginal likelihood.
inline GlmmFit fit_glmm(const DesignMatrix& design, const LogitOptions& opt = {}) {
  const Eigen::Index n = design.y.size();
  if (n == 0) throw Error(ErrorKind::degenerate, "empty design");
  double ymin = design.y.minCoeff(), ymax = design.y.maxCoeff();
  if (ymin == ymax)
    throw Error(ErrorKind::degenerate, "response is constant; nothing to fit");

  std::vector<int> gids(design.group);
  std::sort(gids.begin(), gids.end());
  gids.erase(std::unique(gids.begin(), gids.end()), gids.end());
  std::map<int, int> gidx;
  for (std::size_t i = 0; i < gids.size(); ++i) gidx[gids[i]] = static_cast<int>(i);

  mixed::Problem prob;
  prob.X = design.X;
  prob.intercept = true;
  prob.y = design.y;
  prob.group_row.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) prob.group_row[i] = gidx[design.group[i]];
  prob.n_groups = static_cast<int>(gids.size());

  mixed::OuterResult res = mixed::outer_fit(prob, opt);

  GlmmFit fit;
  fit.beta = res.state.theta;
  fit.beta_cov = res.state.fixed_info_inv;
  fit.sigma_z2 = opt.fix_sigma_z2 ? *opt.fix_sigma_z2 : res.sigma_z2;
  fit.group_ids = gids;
  fit.z = res.state.z;
  fit.loglik = res.state.laplace_ll;
  fit.converged = res.converged;
  fit.inner_iterations = res.state.iterations;
  fit.outer_evaluations = res.evaluations;
  fit.diagnostics.ridge_used = res.state.ridge_used;
  fit.diagnostics.outer_trace = res.accepted_trace;
  if (res.state.eta.size() > 0 && res.state.eta.cwiseAbs().maxCoeff() > 30.0) {
    fit.diagnostics.quasi_separation = true;
    fit.diagnostics.notes.push_back("quasi-separation: |linear predictor| exceeds 30");
  }
  if (!fit.converged)
    fit.diagnostics.notes.push_back("fit did not converge; returning last iterate");
  return fit;
}

// p = inverse-logit(x'beta + z_g); rows must be encoded with the fit's stored
// transform. Unseen groups predict at the population level (z = 0).
inline Eigen::VectorXd predict_glmm(const GlmmFit& fit, const Eigen::MatrixXd& X,
                                    const std::vector<int>& groups) {
  if (X.rows() != static_cast<Eigen::Index>(groups.size()))
    throw Error(ErrorKind::internal, "rows/groups size mismatch");
  if (X.cols() + 1 != fit.beta.size())
    throw Error(ErrorKind::internal, "design width does not match fitted coefficients");
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.rows(), fit.beta[0]);
  eta += X * fit.beta.tail(fit.beta.size() - 1);
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out[i] = logistic(eta[i] + fit.z_for_group(groups[static_cast<std::size_t>(i)]));
  return out;
}

// Proportion of latent variability attributed to the random effects,
// sigma_z2 / (sigma_z2 + pi^2/3).
inline double pvre(double sigma_z2) {
  const double resid = M_PI * M_PI / 3.0;
  return sigma_z2 / (sigma_z2 + resid);
}

inline double pvre(const GlmmFit& fit) { return pvre(fit.sigma_z2); }

struct WaldRow {
  std::string term;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double se = 0;
  double z_stat = 0;
  double p_value = 1;
};

// Wald table in Table-4 column layout; CI quantile pair from the options.
inline std::vector<WaldRow> wald_summary(const GlmmFit& fit, const std::vector<std::string>& labels,
                                         double ci_lo = 0.05, double ci_hi = 0.95) {
  if (static_cast<Eigen::Index>(labels.size()) + 1 != fit.beta.size())
    throw Error(ErrorKind::internal, "label count does not match coefficient count");
  const double qlo = normal_quantile(ci_lo), qhi = normal_quantile(ci_hi);
  std::vector<WaldRow> rows;
  rows.reserve(labels.size() + 1);
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    WaldRow r;
    r.term = k == 0 ? "(Intercept)" : labels[static_cast<std::size_t>(k - 1)];
    r.estimate = fit.beta[k];
    r.se = std::sqrt(std::max(fit.beta_cov(k, k), 0.0));
    r.ci_low = r.estimate + qlo * r.se;
    r.ci_high = r.estimate + qhi * r.se;
    r.z_stat = r.se > 0 ? r.estimate / r.se : 0.0;
    r.p_value = r.se > 0 ? normal_two_sided_p(r.z_stat) : 1.0;
    rows.push_back(r);
  }
  return rows;
}

// Scenario row on the raw covariate scale; slot/week may be fractional.
struct CovariateRow {
  double time_slot = 0;
  double week_number = 0;
  DayType day_type = DayType::working;
  Season season = Season::summer;
  std::array<double, 5> weather{};  // canonical kWeatherColumns order
};

inline double covariate_weather(const CovariateRow& r, const std::string& col) {
  for (std::size_t i = 0; i < kWeatherColumns.size(); ++i)
    if (kWeatherColumns[i] == col) return r.weather[i];
  throw Error(ErrorKind::config, "unknown weather column '" + col + "'");
}

inline Eigen::RowVectorXd encode_covariate_row(const CovariateRow& r, const FeatureTransform& t) {
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    const ColumnMeta& c = t.columns[j];
    double v = 0;
    switch (c.kind) {
      case TermKind::slot_poly: v = std::pow(t.map_slot(r.time_slot), c.degree); break;
      case TermKind::week_poly: v = std::pow(t.map_week(r.week_number), c.degree); break;
      case TermKind::day_dummy: v = r.day_type == c.day ? 1.0 : 0.0; break;
      case TermKind::season_dummy: v = r.season == Season::winter ? 1.0 : 0.0; break;
      case TermKind::weather: v = covariate_weather(r, c.weather); break;
      case TermKind::slot_x_day:
        v = r.day_type == c.day ? std::pow(t.map_slot(r.time_slot), c.degree) : 0.0;
        break;
      case TermKind::day_x_week:
        v = r.day_type == c.day ? std::pow(t.map_week(r.week_number), c.degree) : 0.0;
        break;
    }
    x[static_cast<Eigen::Index>(j)] = v;
  }
  return x;
}

enum class FocalVariable { time_slot, week };

struct MarginalCurve {
  DayType day_type;
  std::vector<double> focal;
  std::vector<double> prob;
  std::vector<double> lo;
  std::vector<double> hi;
  bool extrapolated = false;
};

// Population-level marginal effect curves (z at 0, non-focal covariates at
// reference values, weather defaulting to training means). Pointwise bands by
// the delta method on the linear predictor, mapped through the logistic.
inline std::vector<MarginalCurve> marginal_effects(const GlmmFit& fit, const FeatureTransform& t,
                                                   FocalVariable focal,
                                                   const std::vector<double>& grid,
                                                   std::optional<CovariateRow> reference = {},
                                                   double band_level = 0.95) {
  CovariateRow ref;
  if (reference) {
    ref = *reference;
  } else {
    ref.time_slot = 0.5 * (t.slot_min + t.slot_max);
    ref.week_number = 0.5 * (t.week_min + t.week_max);
    ref.weather = t.weather_means;
  }
  const double q = normal_quantile(0.5 + band_level / 2.0);
  std::vector<MarginalCurve> curves;
  for (DayType d : {DayType::working, DayType::saturday, DayType::holiday, DayType::strike}) {
    MarginalCurve c;
    c.day_type = d;
    for (double g : grid) {
      CovariateRow row = ref;
      row.day_type = d;
      if (focal == FocalVariable::time_slot) {
        row.time_slot = g;
        if (g < t.slot_min || g > t.slot_max) c.extrapolated = true;
      } else {
        row.week_number = g;
        if (g < t.week_min || g > t.week_max) c.extrapolated = true;
      }
      Eigen::RowVectorXd x0 = encode_covariate_row(row, t);
      Eigen::VectorXd x(x0.size() + 1);
      x[0] = 1.0;
      x.tail(x0.size()) = x0.transpose();
      double eta = x.dot(fit.beta);
      double var = x.dot(fit.beta_cov * x);
      double se = std::sqrt(std::max(var, 0.0));
      c.focal.push_back(g);
      c.prob.push_back(logistic(eta));
      c.lo.push_back(logistic(eta - q * se));
      c.hi.push_back(logistic(eta + q * se));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

// Per-segment intercepts sorted by segment id, for Fig-5 style inspection.
inline std::vector<std::pair<int, double>> export_random_effects(const GlmmFit& fit) {
  std::vector<std::pair<int, double>> out;
  out.reserve(fit.group_ids.size());
  for (std::size_t i = 0; i < fit.group_ids.size(); ++i)
    out.emplace_back(fit.group_ids[i], fit.z[static_cast<Eigen::Index>(i)]);
  return out;
}

// Penalized joint log-likelihood and its analytic gradient in (theta, z), for
// gradient checking: l(theta,z) = sum[y*eta - log(1+e^eta)] - z'z/(2*sigma2).
inline std::pair<double, Eigen::VectorXd> penalized_loglik_grad(const mixed::Problem& p,
                                                                const Eigen::VectorXd& theta,
                                                                const Eigen::VectorXd& z,
                                                                double sigma_z2) {
  Eigen::VectorXd eta = mixed::linear_predictor(p, theta, z);
  double ll = mixed::bernoulli_loglik(p.y, eta);
  if (sigma_z2 > 0) ll -= z.squaredNorm() / (2.0 * sigma_z2);
  const Eigen::Index pf = theta.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(pf + z.size());
  for (Eigen::Index i = 0; i < p.y.size(); ++i) {
    double resid = p.y[i] - logistic(eta[i]);
    Eigen::Index k = 0;
    if (p.intercept) grad[k++] += resid;
    for (Eigen::Index c = 0; c < p.X.cols(); ++c) grad[k + c] += resid * p.X(i, c);
    grad[pf + p.group_row[i]] += resid;
  }
  if (sigma_z2 > 0) grad.tail(z.size()) -= z / sigma_z2;
  return {ll, grad};
}

}  // namespace occ
