#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/aggregate.hpp"
#include "occ/csv.hpp"
#include "occ/glmm.hpp"

namespace occ {

struct SplitPlan {
  std::vector<int> train_rides;
  std::vector<int> test_rides;
  double fraction = 0.7;
  std::uint64_t seed = 0;

  bool in_train(int ride_id) const {
    return std::binary_search(train_rides.begin(), train_rides.end(), ride_id);
  }
};

// Ride-granular train/test split: every row of a ride lands on the same side.
inline SplitPlan split_by_rides(const std::vector<SegmentObservation>& obs, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorKind::config, "split fraction must be in (0,1)");
  std::set<int> ids;
  for (const auto& o : obs) ids.insert(o.ride_id);
  std::vector<int> rides(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(rides.begin(), rides.end(), rng);
  std::size_t n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(rides.size())));
  SplitPlan plan;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.train_rides.assign(rides.begin(), rides.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.test_rides.assign(rides.begin() + static_cast<std::ptrdiff_t>(n_train), rides.end());
  std::sort(plan.train_rides.begin(), plan.train_rides.end());
  std::sort(plan.test_rides.begin(), plan.test_rides.end());
  return plan;
}

inline std::vector<SegmentObservation> select_rows(const std::vector<SegmentObservation>& obs,
                                                   const std::vector<int>& ride_ids) {
  std::vector<SegmentObservation> out;
  for (const auto& o : obs)
    if (std::binary_search(ride_ids.begin(), ride_ids.end(), o.ride_id)) out.push_back(o);
  return out;
}

struct DegreePoint {
  int degree = 0;
  double cv_mse = NAN;
  int failed_folds = 0;
  bool disqualified = false;
};

struct DegreeSelection {
  int degree_slot = 0;
  int degree_week = 0;
  std::vector<DegreePoint> slot_curve;
  std::vector<DegreePoint> week_curve;
  std::uint64_t fold_seed = 0;
  int n_folds = 10;
};

namespace detail {

// Ride-level fold assignment: seeded shuffle then round-robin.
inline std::vector<std::vector<int>> make_folds(const std::vector<SegmentObservation>& obs,
                                                int n_folds, std::uint64_t seed) {
  std::set<int> ids;
  for (const auto& o : obs) ids.insert(o.ride_id);
  std::vector<int> rides(ids.begin(), ids.end());
  if (static_cast<int>(rides.size()) < n_folds)
    throw Error(ErrorKind::degenerate, "fewer distinct rides than folds");
  std::mt19937_64 rng(seed);
  std::shuffle(rides.begin(), rides.end(), rng);
  std::vector<std::vector<int>> folds(n_folds);
  for (std::size_t i = 0; i < rides.size(); ++i)
    folds[i % static_cast<std::size_t>(n_folds)].push_back(rides[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

// Brier-score CV for one candidate spec. Constant-response training folds
// fall back to a constant-rate predictor instead of failing the fold.
inline DegreePoint cv_mse_for_spec(const std::vector<SegmentObservation>& obs,
                                   const std::vector<std::vector<int>>& folds,
                                   const ModelSpec& spec, const LogitOptions& opt) {
  DegreePoint pt;
  double se_sum = 0;
  std::size_t n_rows = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<SegmentObservation> test_rows = select_rows(obs, folds[f]);
    std::vector<int> train_ids;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train_ids.insert(train_ids.end(), folds[g].begin(), folds[g].end());
    std::sort(train_ids.begin(), train_ids.end());
    std::vector<SegmentObservation> train_rows = select_rows(obs, train_ids);

    double ymin = 1, ymax = 0;
    for (const auto& o : train_rows) {
      ymin = std::min(ymin, static_cast<double>(o.y));
      ymax = std::max(ymax, static_cast<double>(o.y));
    }
    try {
      if (ymin == ymax) {
        double rate = std::clamp(ymin, 1e-6, 1.0 - 1e-6);
        for (const auto& o : test_rows) {
          double d = static_cast<double>(o.y) - rate;
          se_sum += d * d;
          ++n_rows;
        }
        continue;
      }
      DesignMatrix d = build_design(train_rows, spec);
      GlmmFit fit = fit_glmm(d, opt);
      Eigen::MatrixXd Xt = encode_rows(test_rows, d.transform);
      std::vector<int> groups(test_rows.size());
      for (std::size_t i = 0; i < test_rows.size(); ++i) groups[i] = test_rows[i].segment;
      Eigen::VectorXd p = predict_glmm(fit, Xt, groups);
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        double d2 = static_cast<double>(test_rows[i].y) - p[static_cast<Eigen::Index>(i)];
        se_sum += d2 * d2;
        ++n_rows;
      }
    } catch (const Error&) {
      ++pt.failed_folds;
    }
  }
  pt.disqualified = pt.failed_folds > 2;
  if (n_rows > 0 && !pt.disqualified) pt.cv_mse = se_sum / static_cast<double>(n_rows);
  return pt;
}

}  // namespace detail

// Two-step degree search: scan D_s with D_w pinned, then scan D_w with the
// chosen D_s. MSE is the mean squared error of held-out probabilities over
// ride-level 10-fold CV; ties break toward the smaller degree.
inline DegreeSelection select_degrees(const std::vector<SegmentObservation>& train_obs,
                                      ModelSpec base_spec, int max_degree_slot = 10,
                                      int max_degree_week = 6, int pinned_week_degree = 3,
                                      std::uint64_t fold_seed = 1, int n_folds = 10,
                                      const LogitOptions& opt = {}) {
  DegreeSelection sel;
  sel.fold_seed = fold_seed;
  sel.n_folds = n_folds;
  auto folds = detail::make_folds(train_obs, n_folds, fold_seed);

  auto scan = [&](bool scan_slot, int max_degree, int other_degree) {
    std::vector<DegreePoint> curve;
    int best = -1;
    double best_mse = INFINITY;
    for (int deg = 0; deg <= max_degree; ++deg) {
      ModelSpec spec = base_spec;
      spec.degree_slot = scan_slot ? deg : other_degree;
      spec.degree_week = scan_slot ? other_degree : deg;
      DegreePoint pt = detail::cv_mse_for_spec(train_obs, folds, spec, opt);
      pt.degree = deg;
      if (!pt.disqualified && !std::isnan(pt.cv_mse) && pt.cv_mse < best_mse - 1e-15) {
        best_mse = pt.cv_mse;
        best = deg;
      }
      curve.push_back(pt);
    }
    if (best < 0)
      throw Error(ErrorKind::convergence, "all candidate degrees disqualified in CV scan");
    return std::pair{best, curve};
  };

  auto [ds, slot_curve] = scan(true, max_degree_slot, pinned_week_degree);
  sel.degree_slot = ds;
  sel.slot_curve = std::move(slot_curve);
  auto [dw, week_curve] = scan(false, max_degree_week, sel.degree_slot);
  sel.degree_week = dw;
  sel.week_curve = std::move(week_curve);
  return sel;
}

struct ConfusionBlock {
  long long tp = 0, fn = 0, fp = 0, tn = 0;
  double threshold = 0.5;

  long long total() const { return tp + fn + fp + tn; }
  double accuracy() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
  }
  double pct(long long c) const {
    return total() ? 100.0 * static_cast<double>(c) / static_cast<double>(total()) : 0.0;
  }
};

// Misclassification block (rows = truth, columns = prediction); predict 1 iff
// p >= f.
inline ConfusionBlock confusion(const std::vector<double>& prob, const std::vector<int>& label,
                                double f = 0.5) {
  if (prob.size() != label.size())
    throw Error(ErrorKind::internal, "probability/label size mismatch");
  ConfusionBlock c;
  c.threshold = f;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    bool pred = prob[i] >= f;
    if (label[i] == 1)
      pred ? ++c.tp : ++c.fn;
    else
      pred ? ++c.fp : ++c.tn;
  }
  return c;
}

struct RocReport {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = NAN;
  ConfusionBlock confusion_at_f;
  double accuracy = NAN;
};

// ROC sweep over the distinct predicted values; trapezoid AUC. Ties are
// grouped per threshold, which makes the trapezoid area equal the midrank
// Mann-Whitney statistic.
inline RocReport roc_auc(const std::vector<double>& prob, const std::vector<int>& label,
                         double f = 0.5) {
  if (prob.size() != label.size())
    throw Error(ErrorKind::internal, "probability/label size mismatch");
  long long n_pos = 0, n_neg = 0;
  for (int y : label) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorKind::degenerate, "labels contain a single class; ROC undefined");

  std::vector<std::size_t> order(prob.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return prob[a] > prob[b]; });

  RocReport r;
  r.thresholds.push_back(INFINITY);
  r.fpr.push_back(0);
  r.tpr.push_back(0);
  double auc = 0;
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double t = prob[order[i]];
    long long dtp = 0, dfp = 0;
    while (i < order.size() && prob[order[i]] == t) {
      (label[order[i]] == 1 ? dtp : dfp) += 1;
      ++i;
    }
    double fpr0 = static_cast<double>(fp) / static_cast<double>(n_neg);
    double tpr0 = static_cast<double>(tp) / static_cast<double>(n_pos);
    tp += dtp;
    fp += dfp;
    double fpr1 = static_cast<double>(fp) / static_cast<double>(n_neg);
    double tpr1 = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc += (fpr1 - fpr0) * 0.5 * (tpr0 + tpr1);
    r.thresholds.push_back(t);
    r.fpr.push_back(fpr1);
    r.tpr.push_back(tpr1);
  }
  r.auc = auc;
  r.confusion_at_f = confusion(prob, label, f);
  r.accuracy = r.confusion_at_f.accuracy();
  return r;
}

inline void write_roc_csv(std::ostream& os, const RocReport& r) {
  CsvWriter w(os, {"threshold", "fpr", "tpr"});
  for (std::size_t i = 0; i < r.fpr.size(); ++i)
    w.write_row({std::isinf(r.thresholds[i]) ? "inf" : format_double(r.thresholds[i]),
                 format_double(r.fpr[i]), format_double(r.tpr[i])});
}

inline void write_mse_curves_csv(std::ostream& os, const DegreeSelection& sel) {
  CsvWriter w(os, {"scan", "degree", "cv_mse", "failed_folds"});
  for (const auto& p : sel.slot_curve)
    w.write_row({"time_slot", std::to_string(p.degree),
                 std::isnan(p.cv_mse) ? "" : format_double(p.cv_mse),
                 std::to_string(p.failed_folds)});
  for (const auto& p : sel.week_curve)
    w.write_row({"week", std::to_string(p.degree),
                 std::isnan(p.cv_mse) ? "" : format_double(p.cv_mse),
                 std::to_string(p.failed_folds)});
}

inline nlohmann::json confusion_json(const ConfusionBlock& c) {
  nlohmann::json j;
  j["threshold"] = c.threshold;
  j["counts"] = {{"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}, {"tn", c.tn}};
  j["percent"] = {{"tp", c.pct(c.tp)}, {"fn", c.pct(c.fn)}, {"fp", c.pct(c.fp)},
                  {"tn", c.pct(c.tn)}};
  j["accuracy"] = c.accuracy();
  return j;
}

inline void write_confusion_csv(std::ostream& os, const ConfusionBlock& c) {
  CsvWriter w(os, {"truth", "pred_1", "pred_0", "pred_1_pct", "pred_0_pct"});
  w.write_row({"y=1", std::to_string(c.tp), std::to_string(c.fn), format_double(c.pct(c.tp)),
               format_double(c.pct(c.fn))});
  w.write_row({"y=0", std::to_string(c.fp), std::to_string(c.tn), format_double(c.pct(c.fp)),
               format_double(c.pct(c.tn))});
}

}  // namespace occ
