#include "aggreg/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aggreg/aggregators.hpp"
#include "aggreg/checks.hpp"
#include "aggreg/config.hpp"
#include "aggreg/csv_io.hpp"
#include "aggreg/hardness.hpp"
#include "aggreg/harness.hpp"
#include "aggreg/json_io.hpp"
#include "aggreg/oracles.hpp"

namespace aggreg {

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  int threads = 0;
  std::string design_path;
  std::string targets_path;
  std::string kind;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> m_list;
  std::optional<double> sigma;
  std::size_t reps = 0;
  std::size_t grid_m = 0;
  std::string inject_fault;
};

// Files are staged in memory and written only after every computation has
// succeeded, so a failing command leaves no partial output.
class Output {
 public:
  Output(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {}

  void add(const std::string& name, std::string text) { files_.emplace_back(name, std::move(text)); }

  void commit() {
    if (dir_.empty()) {
      for (const auto& [name, text] : files_) out_ << text;
      return;
    }
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir_ + ": " + ec.message());
    for (const auto& [name, text] : files_) io::write_text_file((std::filesystem::path(dir_) / name).string(), text);
  }

 private:
  std::string dir_;
  std::ostream& out_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  std::string q;
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q;
}

int report(std::ostream& err, int code, const char* kind, const std::string& msg) {
  err << "error: code=" << code << " kind=" << kind << " message=\"" << one_line(msg) << "\"\n";
  return code;
}

PenaltySpec fit_penalty(const Options& o) {
  if (o.config_path.empty()) return PenaltySpec{};
  const auto j = load_json_file(o.config_path);
  if (j.is_object() && j.contains("penalty")) return penalty_from_json(j.at("penalty"));
  return penalty_from_json(j);
}

// Ingested data: bound_l is inferred as the largest |entry| over the design
// and the truth column.
DesignMatrix load_design(const std::string& path, const TargetVector& targets) {
  const auto raw = io::read_design_csv(path);
  double f_max = 0.0;
  for (double v : targets.f_vals) f_max = std::max(f_max, std::abs(v));
  auto design = DesignMatrix::with_inferred_bound(raw.n(), raw.m(), {raw.values().begin(), raw.values().end()}, f_max);
  targets.validate(design);
  return design;
}

void check_format(const Options& o) {
  if (o.format != "json" && o.format != "csv") throw ConfigError("--format must be csv or json");
}

int cmd_fit(const Options& o, std::ostream& out) {
  check_format(o);
  if (o.design_path.empty() || o.targets_path.empty()) throw ConfigError("fit needs --design and --targets");
  const auto targets = io::read_targets_csv(o.targets_path);
  const auto design = load_design(o.design_path, targets);
  const auto penalty = fit_penalty(o);
  const auto res = fit(design, targets.y_vals, penalty);

  Output files(o.out_dir, out);
  if (o.format == "json") {
    files.add("fit.json", dump(io::to_json(res)));
  } else {
    std::ostringstream os;
    os << "j,weight\n";
    for (std::size_t j = 0; j < res.weights.size(); ++j) os << j << ',' << io::format_double(res.weights[j]) << '\n';
    files.add("fit.csv", os.str());
  }
  if (!o.out_dir.empty()) files.add("config.resolved.json", dump({{"penalty", to_json(penalty)}}));
  files.commit();
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  check_format(o);
  if (o.design_path.empty() || o.targets_path.empty()) throw ConfigError("oracle needs --design and --targets");
  const auto targets = io::read_targets_csv(o.targets_path);
  const auto design = load_design(o.design_path, targets);
  std::vector<OracleResult> results;
  const std::string kind = o.kind.empty() ? "all" : o.kind;
  if (kind == "MS" || kind == "all") results.push_back(ms_oracle(design, targets.f_vals));
  if (kind == "C" || kind == "all") results.push_back(convex_oracle(design, targets.f_vals));
  if (kind == "L" || kind == "all") results.push_back(linear_oracle(design, targets.f_vals));
  if (kind == "grid") {
    if (o.grid_m < 1) throw ConfigError("the grid oracle needs --grid-m >= 1");
    results.push_back(maurey_grid_oracle(design, targets.f_vals, o.grid_m));
  }
  if (results.empty()) throw ConfigError("--kind must be MS, C, L, grid or all");

  Output files(o.out_dir, out);
  if (o.format == "json") {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(io::to_json(r));
    files.add("oracle.json", dump(arr));
  } else {
    std::ostringstream os;
    os << "kind,risk,certificate,converged,support\n";
    for (const auto& r : results) {
      os << to_string(r.kind) << ',' << io::format_double(r.risk) << ',' << io::format_double(r.certificate) << ','
         << (r.converged ? 1 : 0) << ',';
      for (std::size_t k = 0; k < r.weights.support().size(); ++k) os << (k ? ";" : "") << r.weights.support()[k];
      os << '\n';
    }
    files.add("oracle.csv", os.str());
  }
  files.commit();
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.config_path.empty()) throw ConfigError("simulate needs --config");
  if (o.out_dir.empty()) throw ConfigError("simulate needs --out");
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
  auto j = load_json_file(o.config_path);
  if (o.seed) j["seed"] = *o.seed;
  if (!o.n_list.empty()) j["n_grid"] = o.n_list;
  if (!o.m_list.empty()) {
    if (o.m_list.size() != 1) throw ConfigError("simulate takes a single --m");
    j["m_dict"] = o.m_list.front();
  }
  if (o.sigma) j["sigma"] = *o.sigma;
  const auto cfg = experiment_config_from_json(j);
  const auto res = run_experiment(cfg);

  json manifest;
  manifest["config"] = to_json(cfg);
  manifest["rate_variant"] = to_string(res.variant);
  manifest["partial"] = res.partial;
  json slopes = json::object();
  if (cfg.n_grid.size() >= 3)
    for (auto kind : {RateKind::MS, RateKind::C, RateKind::L}) {
      try {
        slopes[to_string(kind)] = io::to_json(rate_slope(rate_points(res, kind)));
      } catch (const InvalidInput& e) {
        slopes[to_string(kind)] = {{"error", e.what()}};
      }
    }
  manifest["slopes"] = slopes;
  json counts = json::array();
  for (const auto& row : res.summary)
    if (row.kind == RateKind::MS) counts.push_back({{"n", row.n}, {"reps_ok", row.reps_ok}, {"reps_failed", row.reps_failed}});
  manifest["replications"] = counts;

  Output files(o.out_dir, out);
  if (o.format == "csv") {
    std::ostringstream summary, reps;
    io::write_summary_csv(summary, res);
    io::write_reps_csv(reps, res);
    files.add("summary.csv", summary.str());
    files.add("reps.csv", reps.str());
  } else {
    json rows = json::array();
    for (const auto& r : res.summary)
      rows.push_back({{"n", r.n}, {"M", r.m_dict}, {"kind", to_string(r.kind)}, {"mean_excess", r.mean_excess},
                      {"mc_se", r.mc_se}, {"psi_rate", r.psi_rate}, {"ratio", r.ratio}});
    files.add("summary.json", dump(rows));
  }
  files.add("manifest.json", dump(manifest));
  files.commit();
  return kExitOk;
}

int cmd_rates(const Options& o, std::ostream& out) {
  check_format(o);
  if (o.n_list.empty() || o.m_list.empty()) throw ConfigError("rates needs --n and --m lists");
  for (auto n : o.n_list)
    if (n < 1) throw ConfigError("--n values must be >= 1");
  for (auto m : o.m_list)
    if (m < 2) throw ConfigError("--m values must be >= 2");
  Output files(o.out_dir, out);
  if (o.format == "csv") {
    std::ostringstream os;
    io::write_rate_table_csv(os, o.n_list, o.m_list);
    files.add("rates.csv", os.str());
  } else {
    json rows = json::array();
    for (auto n : o.n_list)
      for (auto m : o.m_list) {
        json row{{"n", n}, {"M", m}};
        for (auto v : {RateVariant::base, RateVariant::tilde, RateVariant::bar})
          for (auto k : {RateKind::MS, RateKind::C, RateKind::L})
            row[to_string(k) + "_" + to_string(v)] = psi_rate(n, m, k, v);
        rows.push_back(row);
      }
    files.add("rates.json", dump(rows));
  }
  files.commit();
  return kExitOk;
}

int cmd_hardness(const Options& o, std::ostream& out) {
  if (o.out_dir.empty()) throw ConfigError("hardness needs --out");
  json j = o.config_path.empty() ? json::object() : load_json_file(o.config_path);
  if (!j.is_object()) throw ConfigError("hardness config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "n" && it.key() != "m_dict" && it.key() != "sigma" && it.key() != "reps" &&
        it.key() != "seed" && it.key() != "penalty")
      throw ConfigError("hardness config: unknown key '" + it.key() + "'");
  try {
    if (!o.kind.empty()) j["kind"] = o.kind;
    if (!o.n_list.empty()) j["n"] = o.n_list.front();
    if (!o.m_list.empty()) j["m_dict"] = o.m_list.front();
    if (o.sigma) j["sigma"] = *o.sigma;
    if (o.reps > 0) j["reps"] = o.reps;
    if (o.seed) j["seed"] = *o.seed;
    if (!j.contains("kind") || !j.contains("n") || !j.contains("m_dict"))
      throw ConfigError("hardness needs kind, n and M (--kind, --n, --m or config)");
    const auto kind = parse_hard_kind(j.at("kind").get<std::string>());
    const auto n = j.at("n").get<std::size_t>();
    const auto m = j.at("m_dict").get<std::size_t>();
    const double sigma = j.value("sigma", 1.0);
    const std::size_t reps = j.value("reps", std::size_t{0});
    const std::uint64_t seed = j.value("seed", std::uint64_t{1});
    // Default aggregate: hard threshold with K1 = 2 sigma^2.
    PenaltySpec penalty = PenaltySpec::hard(2.0 * sigma * sigma);
    if (j.contains("penalty")) penalty = penalty_from_json(j.at("penalty"), sigma);
    if (!(sigma > 0.0)) throw ConfigError("hardness needs sigma > 0");

    const auto inst = kind == HardKind::MSHard ? make_ms_hard(n, m, sigma) : make_l_hard(n, m, sigma);
    json side = io::to_json(inst);
    if (reps > 0) {
      Estimator est = [&](const DesignMatrix& d, std::span<const double> y) {
        return combine(d, fit(d, y, penalty).weights);
      };
      side["minimax"] = io::to_json(minimax_eval(inst, est, reps, seed));
      side["minimax"]["psi_rate"] = psi_rate(n, m, kind == HardKind::MSHard ? RateKind::MS : RateKind::L);
    }
    j["kind"] = to_string(kind);
    j["penalty"] = to_json(penalty);
    side["config"] = j;

    std::ostringstream design, truths;
    io::write_design_csv(design, inst.design);
    io::write_truths_csv(truths, inst);
    Output files(o.out_dir, out);
    files.add("design.csv", design.str());
    files.add("truths.csv", truths.str());
    files.add("hardness.json", dump(side));
    files.commit();
    return kExitOk;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hardness config: ") + e.what());
  }
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  CheckOptions co;
  if (o.seed) co.seed = *o.seed;
  co.inject_fault = o.inject_fault;
  if (!co.inject_fault.empty() && co.inject_fault != "chi2-bound")
    throw ConfigError("unknown --inject-fault '" + co.inject_fault + "' (known: chi2-bound)");
  const auto results = run_checks(co);
  std::ostringstream report_csv;
  report_csv << "check,pass,measured,bound,detail\n";
  std::size_t failed = 0;
  std::string first_failure;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << " measured=" << io::format_double(r.measured)
        << " bound=" << io::format_double(r.bound) << (r.detail.empty() ? "" : " (" + r.detail + ")") << '\n';
    report_csv << r.name << ',' << (r.pass ? 1 : 0) << ',' << io::format_double(r.measured) << ','
               << io::format_double(r.bound) << ",\"" << r.detail << "\"\n";
    if (!r.pass) {
      if (failed == 0) first_failure = r.name;
      ++failed;
    }
  }
  out << "checks: " << results.size() - failed << " passed, " << failed << " failed\n";
  if (!o.out_dir.empty()) {
    Output files(o.out_dir, out);
    files.add("check.csv", report_csv.str());
    files.commit();
  }
  if (failed > 0) {
    err << "error: code=1 kind=check message=\"" << failed << " check(s) failed; first: " << first_failure << "\"\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aggregation of regression estimators: fits, oracles, experiments, hard instances, checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aggreg 1.0");
  Options o;
  std::uint64_t seed_value = 0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file");
    sub->add_option("--out", o.out_dir, "output directory (stdout when omitted, where allowed)");
    sub->add_option("--seed", seed_value, "random seed (overrides the config)");
    sub->add_option("--format", o.format, "output format: csv or json");
    sub->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  };
  auto* fit_cmd = app.add_subcommand("fit", "penalized least-squares aggregate from CSV data");
  auto* oracle_cmd = app.add_subcommand("oracle", "MS / C / L oracle (and Maurey grid) for CSV data");
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiment from a JSON config");
  auto* rates_cmd = app.add_subcommand("rates", "table of optimal aggregation rates");
  auto* hard_cmd = app.add_subcommand("hardness", "hard instance export and minimax evaluation");
  auto* check_cmd = app.add_subcommand("check", "deterministic theory-check battery");
  for (auto* sub : {fit_cmd, oracle_cmd, sim_cmd, rates_cmd, hard_cmd, check_cmd}) common(sub);
  for (auto* sub : {fit_cmd, oracle_cmd}) {
    sub->add_option("--design", o.design_path, "design CSV (header j0..j{M-1})");
    sub->add_option("--targets", o.targets_path, "targets CSV (header f,y)");
  }
  oracle_cmd->add_option("--kind", o.kind, "MS, C, L, grid or all");
  oracle_cmd->add_option("--grid-m", o.grid_m, "grid resolution for --kind grid");
  hard_cmd->add_option("--kind", o.kind, "ms-hard or l-hard");
  for (auto* sub : {sim_cmd, rates_cmd, hard_cmd}) {
    sub->add_option("--n", o.n_list, "sample size(s)")->delimiter(',');
    sub->add_option("--m", o.m_list, "dictionary size(s)")->delimiter(',');
  }
  for (auto* sub : {sim_cmd, hard_cmd}) sub->add_option("--sigma", o.sigma, "noise level");
  hard_cmd->add_option("--reps", o.reps, "replications per truth for the minimax evaluation");
  check_cmd->add_option("--inject-fault", o.inject_fault, "test hook: chi2-bound");
  rates_cmd->get_option("--format")->default_str("csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report(err, kExitConfig, "usage", e.what());
  }

  for (auto* sub : app.get_subcommands())
    if (sub->get_option("--seed")->count() > 0) o.seed = seed_value;
  if (rates_cmd->parsed() && rates_cmd->get_option("--format")->count() == 0) o.format = "csv";
  if (sim_cmd->parsed() && sim_cmd->get_option("--format")->count() == 0) o.format = "csv";
  if (o.threads > 0) omp_set_num_threads(o.threads);

  try {
    if (fit_cmd->parsed()) return cmd_fit(o, out);
    if (oracle_cmd->parsed()) return cmd_oracle(o, out);
    if (sim_cmd->parsed()) return cmd_simulate(o, out);
    if (rates_cmd->parsed()) return cmd_rates(o, out);
    if (hard_cmd->parsed()) return cmd_hardness(o, out);
    if (check_cmd->parsed()) return cmd_check(o, out, err);
  } catch (const ConfigError& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const PreconditionError& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const BudgetExceeded& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const DomainError& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const CapacityError& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const InvalidInput& e) {
    return report(err, kExitInput, "input", e.what());
  } catch (const std::exception& e) {
    return report(err, kExitCheckFailed, "internal", e.what());
  }
  return report(err, kExitConfig, "usage", "no subcommand");
}

}  // namespace aggreg
