#pragma once

// JSON (de)serialization of fitted-model artifacts and the provenance block
// every run embeds for byte-reproducibility.

#include <string>
#include <vector>

#include <json.hpp>

#include "occ/features.hpp"
#include "occ/glmm.hpp"
#include "occ/gmerf.hpp"
#include "occ/mathutil.hpp"

namespace occ {

inline constexpr const char* kToolVersion = "0.1.0";

struct Provenance {
  std::string version = kToolVersion;
  std::string config_hash;  // fnv1a-64 of the canonical config dump, hex
  std::uint64_t seed = 0;
  int threads = 1;
};

inline std::string config_hash_hex(const std::string& canonical_config) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config)));
  return buf;
}

inline nlohmann::json provenance_json(const Provenance& p) {
  nlohmann::json j;
  j["tool_version"] = p.version;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  j["threads"] = p.threads;
  return j;
}

inline const char* term_kind_name(TermKind k) {
  switch (k) {
    case TermKind::slot_poly: return "slot_poly";
    case TermKind::week_poly: return "week_poly";
    case TermKind::day_dummy: return "day_dummy";
    case TermKind::season_dummy: return "season_dummy";
    case TermKind::weather: return "weather";
    case TermKind::slot_x_day: return "slot_x_day";
    case TermKind::day_x_week: return "day_x_week";
  }
  return "?";
}

inline TermKind parse_term_kind(const std::string& s) {
  if (s == "slot_poly") return TermKind::slot_poly;
  if (s == "week_poly") return TermKind::week_poly;
  if (s == "day_dummy") return TermKind::day_dummy;
  if (s == "season_dummy") return TermKind::season_dummy;
  if (s == "weather") return TermKind::weather;
  if (s == "slot_x_day") return TermKind::slot_x_day;
  if (s == "day_x_week") return TermKind::day_x_week;
  throw Error(ErrorKind::schema, "unknown term kind '" + s + "'");
}

inline nlohmann::json model_spec_json(const ModelSpec& s) {
  nlohmann::json j;
  j["degree_slot"] = s.degree_slot;
  j["degree_week"] = s.degree_week;
  j["day_type_baseline"] = day_type_name(s.day_type_baseline);
  j["interact_slot_day"] = s.interact_slot_day;
  j["interact_day_week"] = s.interact_day_week;
  j["include_season"] = s.include_season;
  j["weather_columns"] = s.weather_columns;
  return j;
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.degree_slot = j.value("degree_slot", s.degree_slot);
  s.degree_week = j.value("degree_week", s.degree_week);
  if (j.contains("day_type_baseline"))
    s.day_type_baseline = parse_day_type(j["day_type_baseline"].get<std::string>());
  s.interact_slot_day = j.value("interact_slot_day", s.interact_slot_day);
  s.interact_day_week = j.value("interact_day_week", s.interact_day_week);
  s.include_season = j.value("include_season", s.include_season);
  if (j.contains("weather_columns"))
    s.weather_columns = j["weather_columns"].get<std::vector<std::string>>();
  return s;
}

inline nlohmann::json transform_json(const FeatureTransform& t) {
  nlohmann::json j;
  j["slot_min"] = t.slot_min;
  j["slot_max"] = t.slot_max;
  j["week_min"] = t.week_min;
  j["week_max"] = t.week_max;
  j["weather_means"] = t.weather_means;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : t.columns) {
    nlohmann::json e;
    e["kind"] = term_kind_name(c.kind);
    e["degree"] = c.degree;
    e["day"] = day_type_name(c.day);
    e["weather"] = c.weather;
    cols.push_back(e);
  }
  j["columns"] = cols;
  return j;
}

inline FeatureTransform transform_from_json(const nlohmann::json& j) {
  FeatureTransform t;
  t.slot_min = j.value("slot_min", 0.0);
  t.slot_max = j.value("slot_max", 1.0);
  t.week_min = j.value("week_min", 0.0);
  t.week_max = j.value("week_max", 1.0);
  if (j.contains("weather_means"))
    for (std::size_t i = 0; i < t.weather_means.size(); ++i)
      t.weather_means[i] = j["weather_means"][i].get<double>();
  for (const auto& e : j["columns"]) {
    ColumnMeta c;
    c.kind = parse_term_kind(e["kind"].get<std::string>());
    c.degree = e.value("degree", 0);
    c.day = parse_day_type(e.value("day", "working"));
    c.weather = e.value("weather", "");
    t.columns.push_back(c);
  }
  return t;
}

struct GlmmArtifact {
  ModelSpec spec;
  FeatureTransform transform;
  GlmmFit fit;
  Provenance provenance;
};

inline nlohmann::json glmm_artifact_json(const GlmmArtifact& a) {
  nlohmann::json j;
  j["kind"] = "glmm";
  j["provenance"] = provenance_json(a.provenance);
  j["model_spec"] = model_spec_json(a.spec);
  j["transform"] = transform_json(a.transform);
  j["beta"] = std::vector<double>(a.fit.beta.data(), a.fit.beta.data() + a.fit.beta.size());
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index r = 0; r < a.fit.beta_cov.rows(); ++r) {
    std::vector<double> row(a.fit.beta_cov.cols());
    for (Eigen::Index c = 0; c < a.fit.beta_cov.cols(); ++c) row[c] = a.fit.beta_cov(r, c);
    cov.push_back(row);
  }
  j["beta_cov"] = cov;
  j["sigma_z2"] = a.fit.sigma_z2;
  j["group_ids"] = a.fit.group_ids;
  j["z"] = std::vector<double>(a.fit.z.data(), a.fit.z.data() + a.fit.z.size());
  j["loglik"] = a.fit.loglik;
  j["converged"] = a.fit.converged;
  j["inner_iterations"] = a.fit.inner_iterations;
  j["outer_evaluations"] = a.fit.outer_evaluations;
  j["diagnostics"] = {{"ridge_used", a.fit.diagnostics.ridge_used},
                      {"quasi_separation", a.fit.diagnostics.quasi_separation},
                      {"outer_trace", a.fit.diagnostics.outer_trace},
                      {"notes", a.fit.diagnostics.notes}};
  return j;
}

inline GlmmArtifact glmm_artifact_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "glmm")
    throw Error(ErrorKind::schema, "artifact is not a glmm fit");
  GlmmArtifact a;
  a.spec = model_spec_from_json(j["model_spec"]);
  a.transform = transform_from_json(j["transform"]);
  auto beta = j["beta"].get<std::vector<double>>();
  a.fit.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const auto& cov = j["beta_cov"];
  a.fit.beta_cov.resize(static_cast<Eigen::Index>(cov.size()),
                        static_cast<Eigen::Index>(cov.empty() ? 0 : cov[0].size()));
  for (Eigen::Index r = 0; r < a.fit.beta_cov.rows(); ++r)
    for (Eigen::Index c = 0; c < a.fit.beta_cov.cols(); ++c)
      a.fit.beta_cov(r, c) = cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  a.fit.sigma_z2 = j["sigma_z2"].get<double>();
  a.fit.group_ids = j["group_ids"].get<std::vector<int>>();
  auto z = j["z"].get<std::vector<double>>();
  a.fit.z = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  a.fit.loglik = j.value("loglik", NAN);
  a.fit.converged = j.value("converged", false);
  a.fit.inner_iterations = j.value("inner_iterations", 0);
  a.fit.outer_evaluations = j.value("outer_evaluations", 0);
  if (j.contains("provenance")) {
    a.provenance.version = j["provenance"].value("tool_version", "");
    a.provenance.config_hash = j["provenance"].value("config_hash", "");
    a.provenance.seed = j["provenance"].value("seed", 0ull);
    a.provenance.threads = j["provenance"].value("threads", 1);
  }
  return a;
}

struct GmerfArtifact {
  ModelSpec spec;
  FeatureTransform transform;
  GmerfFit fit;
  Provenance provenance;
};

inline nlohmann::json gmerf_artifact_json(const GmerfArtifact& a) {
  nlohmann::json j;
  j["kind"] = "gmerf";
  j["provenance"] = provenance_json(a.provenance);
  j["model_spec"] = model_spec_json(a.spec);
  j["transform"] = transform_json(a.transform);
  nlohmann::json forest;
  forest["n_trees"] = a.fit.forest.params.n_trees;
  forest["mtry"] = a.fit.forest.params.mtry;
  forest["min_leaf"] = a.fit.forest.params.min_leaf;
  forest["max_depth"] = a.fit.forest.params.max_depth;
  forest["bootstrap"] = a.fit.forest.params.bootstrap;
  forest["seed"] = a.fit.forest.params.seed;
  forest["n_features"] = a.fit.forest.n_features;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : a.fit.forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(nodes);
  }
  forest["trees"] = trees;
  j["forest"] = forest;
  j["sigma_z2"] = a.fit.sigma_z2;
  j["group_ids"] = a.fit.group_ids;
  j["z"] = std::vector<double>(a.fit.z.data(), a.fit.z.data() + a.fit.z.size());
  j["trace"] = a.fit.trace;
  j["accepted_trace"] = a.fit.accepted_trace;
  j["converged"] = a.fit.converged;
  j["iterations"] = a.fit.iterations;
  return j;
}

inline GmerfArtifact gmerf_artifact_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "gmerf")
    throw Error(ErrorKind::schema, "artifact is not a gmerf fit");
  GmerfArtifact a;
  a.spec = model_spec_from_json(j["model_spec"]);
  a.transform = transform_from_json(j["transform"]);
  const auto& f = j["forest"];
  a.fit.forest.params.n_trees = f.value("n_trees", 0);
  a.fit.forest.params.mtry = f.value("mtry", 0);
  a.fit.forest.params.min_leaf = f.value("min_leaf", 25);
  a.fit.forest.params.max_depth = f.value("max_depth", 0);
  a.fit.forest.params.bootstrap = f.value("bootstrap", true);
  a.fit.forest.params.seed = f.value("seed", 0ull);
  a.fit.forest.n_features = f.value("n_features", 0);
  for (const auto& t : f["trees"]) {
    RegressionTree tree;
    for (const auto& n : t) {
      TreeNode node;
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      node.value = n[4].get<double>();
      tree.nodes.push_back(node);
    }
    a.fit.forest.trees.push_back(std::move(tree));
  }
  a.fit.sigma_z2 = j["sigma_z2"].get<double>();
  a.fit.group_ids = j["group_ids"].get<std::vector<int>>();
  auto z = j["z"].get<std::vector<double>>();
  a.fit.z = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  if (j.contains("trace")) a.fit.trace = j["trace"].get<std::vector<double>>();
  if (j.contains("accepted_trace"))
    a.fit.accepted_trace = j["accepted_trace"].get<std::vector<double>>();
  a.fit.converged = j.value("converged", false);
  a.fit.iterations = j.value("iterations", 0);
  if (j.contains("provenance")) {
    a.provenance.version = j["provenance"].value("tool_version", "");
    a.provenance.config_hash = j["provenance"].value("config_hash", "");
    a.provenance.seed = j["provenance"].value("seed", 0ull);
    a.provenance.threads = j["provenance"].value("threads", 1);
  }
  return a;
}

inline void write_wald_csv(std::ostream& os, const std::vector<WaldRow>& rows) {
  CsvWriter w(os, {"term", "estimate", "ci_low", "ci_high", "se", "z", "p"});
  for (const auto& r : rows)
    w.write_row({r.term, format_double(r.estimate), format_double(r.ci_low),
                 format_double(r.ci_high), format_double(r.se), format_double(r.z_stat),
                 format_double(r.p_value)});
}

inline void write_random_effects_csv(std::ostream& os,
                                     const std::vector<std::pair<int, double>>& re) {
  CsvWriter w(os, {"segment", "z"});
  for (const auto& [seg, z] : re) w.write_row({std::to_string(seg), format_double(z)});
}

}  // namespace occ
