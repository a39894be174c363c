#include "aggreg/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>

namespace aggreg {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string(key) + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(std::string(key) + " must be true or false");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> get_numbers(const json& v, const char* key) {
  if (!v.is_array()) throw ConfigError(std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string(key) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

DictionaryKind parse_dictionary_kind(const std::string& s) {
  for (auto k : {DictionaryKind::OrthonormalCosine, DictionaryKind::IndicatorBlocks, DictionaryKind::PointMass,
                 DictionaryKind::RandomBounded, DictionaryKind::UserCsv})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown dictionary kind '" + s + "'");
}

TruthKind parse_truth_kind(const std::string& s) {
  for (auto k : {TruthKind::InDictionary, TruthKind::ConvexCombo, TruthKind::LinearCombo, TruthKind::OutsideSpan})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown truth kind '" + s + "'");
}

DesignKind parse_design_kind(const std::string& s) {
  for (auto k : {DesignKind::FixedGrid, DesignKind::RandomUniform})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown design kind '" + s + "'");
}

HardKind parse_hard_kind(const std::string& s) {
  if (s == "ms-hard" || s == "MS-hard" || s == "ms") return HardKind::MSHard;
  if (s == "l-hard" || s == "L-hard" || s == "l") return HardKind::LHard;
  throw ConfigError("unknown hard-instance kind '" + s + "'");
}

RateKind parse_rate_kind(const std::string& s) {
  if (s == "MS" || s == "ms") return RateKind::MS;
  if (s == "C" || s == "c") return RateKind::C;
  if (s == "L" || s == "l") return RateKind::L;
  throw ConfigError("unknown oracle kind '" + s + "'");
}

PenaltySpec penalty_from_json(const json& j, double default_sigma) {
  try {
    require_object(j, "penalty");
    reject_unknown(j, "penalty", {"kind", "k1", "use_max_mn", "sigma", "t_radius", "multiplier"});
    PenaltySpec p;
    const auto kind = get_string(j, "kind", "hard");
    if (kind == "hard" || kind == "hard-threshold") {
      p.kind = PenaltyKind::HardThreshold;
    } else if (kind == "soft" || kind == "soft-threshold" || kind == "l1") {
      p.kind = PenaltyKind::SoftThresholdL1;
    } else {
      throw ConfigError("unknown penalty kind '" + kind + "'");
    }
    p.k1 = get_number(j, "k1", p.k1);
    p.use_max_mn = get_bool(j, "use_max_mn", p.use_max_mn);
    p.sigma = get_number(j, "sigma", default_sigma);
    if (j.contains("t_radius") && !j.at("t_radius").is_null()) p.t_radius = get_number(j, "t_radius", 0.0);
    p.l1_multiplier = get_number(j, "multiplier", p.l1_multiplier);
    try {
      p.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("penalty: ") + e.what());
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("penalty: ") + e.what());
  }
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    require_object(j, "config");
    reject_unknown(j, "config",
                   {"n_grid", "m_dict", "dictionary", "user_csv", "truth", "sigma", "penalty", "reps", "seed",
                    "design", "holdout_size", "solver"});
    ExperimentConfig cfg;
    if (j.contains("n_grid")) {
      const auto& g = j.at("n_grid");
      if (!g.is_array()) throw ConfigError("n_grid must be an array of integers");
      cfg.n_grid.clear();
      for (const auto& e : g) {
        if (!e.is_number_integer() || e.get<long long>() < 1) throw ConfigError("n_grid entries must be integers >= 1");
        cfg.n_grid.push_back(e.get<std::size_t>());
      }
    }
    if (j.contains("m_dict")) {
      const auto& m = j.at("m_dict");
      if (m.is_object()) {
        reject_unknown(m, "m_dict", {"sqrt_n_multiple"});
        cfg.m_sqrt_multiple = get_count(m, "sqrt_n_multiple", 0);
        if (cfg.m_sqrt_multiple < 1) throw ConfigError("m_dict.sqrt_n_multiple must be >= 1");
      } else {
        cfg.m_dict = get_count(j, "m_dict", cfg.m_dict);
      }
    }
    cfg.dictionary = parse_dictionary_kind(get_string(j, "dictionary", to_string(cfg.dictionary)));
    cfg.user_csv = get_string(j, "user_csv", "");
    cfg.sigma = get_number(j, "sigma", cfg.sigma);
    cfg.reps = get_count(j, "reps", cfg.reps);
    cfg.seed = get_count(j, "seed", cfg.seed);
    cfg.design = parse_design_kind(get_string(j, "design", to_string(cfg.design)));
    cfg.holdout_size = get_count(j, "holdout_size", cfg.holdout_size);

    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      require_object(t, "truth");
      reject_unknown(t, "truth", {"kind", "index", "weights", "amplitude", "frequency"});
      cfg.truth.kind = parse_truth_kind(get_string(t, "kind", "in-dictionary"));
      cfg.truth.index = get_count(t, "index", 0);
      if (t.contains("weights")) {
        const auto& w = t.at("weights");
        if (w.is_string()) {
          if (w.get<std::string>() != "uniform") throw ConfigError("truth.weights must be an array or \"uniform\"");
          cfg.truth.uniform = true;
        } else {
          cfg.truth.weights = get_numbers(w, "truth.weights");
        }
      } else if (cfg.truth.kind == TruthKind::ConvexCombo || cfg.truth.kind == TruthKind::LinearCombo) {
        throw ConfigError("truth.weights is required for " + to_string(cfg.truth.kind));
      }
      if (cfg.truth.uniform && cfg.truth.kind != TruthKind::ConvexCombo)
        throw ConfigError("\"uniform\" weights are only defined for convex-combo truths");
      cfg.truth.amplitude = get_number(t, "amplitude", cfg.truth.amplitude);
      cfg.truth.frequency = get_number(t, "frequency", cfg.truth.frequency);
    }

    cfg.penalty = j.contains("penalty") ? penalty_from_json(j.at("penalty"), cfg.sigma) : PenaltySpec{};
    if (!j.contains("penalty")) cfg.penalty.sigma = cfg.sigma > 0.0 ? cfg.sigma : 1.0;

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      require_object(s, "solver");
      reject_unknown(s, "solver",
                     {"subset_budget", "allow_greedy", "orthonormal_shortcut", "l1_tol", "l1_max_iters", "gap_tol",
                      "convex_max_iters"});
      cfg.hard_options.budget = get_number(s, "subset_budget", cfg.hard_options.budget);
      cfg.hard_options.allow_greedy = get_bool(s, "allow_greedy", cfg.hard_options.allow_greedy);
      cfg.hard_options.orthonormal_shortcut = get_bool(s, "orthonormal_shortcut", cfg.hard_options.orthonormal_shortcut);
      cfg.soft_options.tol = get_number(s, "l1_tol", cfg.soft_options.tol);
      cfg.soft_options.max_iters = get_count(s, "l1_max_iters", cfg.soft_options.max_iters);
      cfg.convex_options.gap_tol = get_number(s, "gap_tol", cfg.convex_options.gap_tol);
      cfg.convex_options.max_iters = get_count(s, "convex_max_iters", cfg.convex_options.max_iters);
      if (!(cfg.hard_options.budget >= 1.0)) throw ConfigError("solver.subset_budget must be >= 1");
      if (!(cfg.soft_options.tol > 0.0)) throw ConfigError("solver.l1_tol must be > 0");
      if (!(cfg.convex_options.gap_tol > 0.0)) throw ConfigError("solver.gap_tol must be > 0");
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

json to_json(const PenaltySpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["k1"] = p.k1;
  j["use_max_mn"] = p.use_max_mn;
  j["sigma"] = p.sigma;
  j["t_radius"] = p.t_radius ? json(*p.t_radius) : json(nullptr);
  j["multiplier"] = p.l1_multiplier;
  return j;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_grid"] = cfg.n_grid;
  if (cfg.m_sqrt_multiple > 0)
    j["m_dict"] = {{"sqrt_n_multiple", cfg.m_sqrt_multiple}};
  else
    j["m_dict"] = cfg.m_dict;
  j["dictionary"] = to_string(cfg.dictionary);
  if (!cfg.user_csv.empty()) j["user_csv"] = cfg.user_csv;
  json t;
  t["kind"] = to_string(cfg.truth.kind);
  switch (cfg.truth.kind) {
    case TruthKind::InDictionary: t["index"] = cfg.truth.index; break;
    case TruthKind::ConvexCombo:
    case TruthKind::LinearCombo:
      t["weights"] = cfg.truth.uniform ? json("uniform") : json(cfg.truth.weights);
      break;
    case TruthKind::OutsideSpan:
      t["amplitude"] = cfg.truth.amplitude;
      t["frequency"] = cfg.truth.frequency;
      break;
  }
  j["truth"] = t;
  j["sigma"] = cfg.sigma;
  j["penalty"] = to_json(cfg.penalty);
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["design"] = to_string(cfg.design);
  j["holdout_size"] = cfg.holdout_size;
  j["solver"] = {{"subset_budget", cfg.hard_options.budget},
                 {"allow_greedy", cfg.hard_options.allow_greedy},
                 {"orthonormal_shortcut", cfg.hard_options.orthonormal_shortcut},
                 {"l1_tol", cfg.soft_options.tol},
                 {"l1_max_iters", cfg.soft_options.max_iters},
                 {"gap_tol", cfg.convex_options.gap_tol},
                 {"convex_max_iters", cfg.convex_options.max_iters}};
  return j;
}

}  // namespace aggreg
