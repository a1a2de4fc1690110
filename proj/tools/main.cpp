// ldlab command-line tool: one entry point over the model, simulation,
// action, condition-checking, rate-verification, and Hamilton-Jacobi
// machinery. Every run reads an optional JSON config plus flags, executes
// one subcommand, and writes JSON/CSV artifacts stamped with the tool
// version, a config hash, and the RNG seed; a wall-clock timestamp is the
// only non-reproducible field and sits isolated on its own line.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ldlab/action.hpp"
#include "ldlab/conditions.hpp"
#include "ldlab/errors.hpp"
#include "ldlab/flows.hpp"
#include "ldlab/hj1d.hpp"
#include "ldlab/ldp.hpp"
#include "ldlab/legendre.hpp"
#include "ldlab/model.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/simulate.hpp"

namespace {

using json = nlohmann::json;
using namespace ldlab;

constexpr const char* kToolName = "ldlab";
constexpr const char* kVersion = "1.0.0";

#ifndef LDLAB_BUNDLED_MODELS_DIR
#define LDLAB_BUNDLED_MODELS_DIR ""
#endif

int default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------- helpers

json json_num(double v) {
  if (std::isnan(v)) return json("nan");
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(json_num(x));
  return out;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read file: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory: " + p.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write file: " + path);
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + what + " at byte " +
                          std::to_string(e.byte) + ": " + e.what());
  }
}

Vec parse_double_list(const std::string& s, const std::string& what) {
  Vec out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace((unsigned char)item[used]))
        ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<std::string> split_semicolons(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(item);
  return out;
}

// ---------------------------------------------------- config/flag merging

// One declared config field: its JSON default drives the CLI default, the
// schema entry, and the type check when a config file overrides it.
class SubConfig {
 public:
  SubConfig(CLI::App* app, std::string title, std::string description)
      : app_(app), title_(std::move(title)), desc_(std::move(description)) {
    app_->add_flag("--schema", schema_flag_,
                   "print this subcommand's JSON config schema and exit");
    app_->add_option("--config", config_path_,
                     "JSON file whose keys override the defaults below");
    app_->add_option("--out", out_dir_, "output directory for artifacts")
        ->capture_default_str();
  }

  void add_string(const std::string& key, const std::string& def,
                  const std::string& desc) {
    defaults_[key] = def;
    describe(key, "string", desc, json(def));
    auto* slot = &strings_[key];
    *slot = def;
    options_[key] = app_->add_option("--" + key, *slot, desc);
  }

  void add_number(const std::string& key, double def,
                  const std::string& desc) {
    defaults_[key] = def;
    describe(key, "number", desc, json(def));
    auto* slot = &numbers_[key];
    *slot = def;
    options_[key] = app_->add_option("--" + key, *slot, desc);
  }

  void add_integer(const std::string& key, long long def,
                   const std::string& desc) {
    defaults_[key] = def;
    describe(key, "integer", desc, json(def));
    auto* slot = &integers_[key];
    *slot = def;
    options_[key] = app_->add_option("--" + key, *slot, desc);
  }

  void add_boolean(const std::string& key, bool def, const std::string& desc) {
    defaults_[key] = def;
    describe(key, "boolean", desc, json(def));
    auto* slot = &booleans_[key];
    *slot = def;
    options_[key] = app_->add_flag("--" + key + ",!--no-" + key, *slot, desc);
  }

  // list of numbers; the flag form is comma-separated
  void add_number_list(const std::string& key, const Vec& def,
                       const std::string& desc) {
    defaults_[key] = json::array();
    for (double v : def) defaults_[key].push_back(v);
    describe(key, "array of numbers (flag form: comma-separated)", desc,
             defaults_[key]);
    auto* slot = &strings_[key];
    options_[key] = app_->add_option("--" + key, *slot, desc);
    list_keys_.push_back(key);
  }

  bool schema_requested() const { return schema_flag_; }
  const std::string& out_dir() const { return out_dir_; }

  json schema() const {
    json s;
    s["title"] = title_;
    s["description"] = desc_;
    s["type"] = "object";
    s["additionalProperties"] = false;
    s["properties"] = properties_;
    return s;
  }

  // defaults, overridden by the config file, overridden by explicit flags
  json effective() const {
    json eff = defaults_;
    if (!config_path_.empty()) {
      json cfg = parse_json_text(read_text_file(config_path_), config_path_);
      if (!cfg.is_object())
        throw ValidationError("config must be a JSON object: " + config_path_);
      for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!eff.contains(it.key()))
          throw ValidationError("unknown config key '" + it.key() + "' for " +
                                title_);
        assign_checked(eff, it.key(), it.value());
      }
    }
    for (const auto& [key, opt] : options_) {
      if (opt->count() == 0) continue;
      if (strings_.count(key)) {
        if (is_list(key))
          eff[key] = parse_double_list(strings_.at(key), key);
        else
          eff[key] = strings_.at(key);
      } else if (numbers_.count(key)) {
        eff[key] = numbers_.at(key);
      } else if (integers_.count(key)) {
        eff[key] = integers_.at(key);
      } else if (booleans_.count(key)) {
        eff[key] = booleans_.at(key);
      }
    }
    return eff;
  }

 private:
  bool is_list(const std::string& key) const {
    for (const auto& k : list_keys_)
      if (k == key) return true;
    return false;
  }

  void describe(const std::string& key, const std::string& type,
                const std::string& desc, const json& def) {
    json p;
    p["type"] = type;
    p["description"] = desc;
    p["default"] = def;
    properties_[key] = p;
  }

  void assign_checked(json& eff, const std::string& key,
                      const json& value) const {
    const json& def = defaults_.at(key);
    bool ok = false;
    if (def.is_string()) ok = value.is_string();
    else if (def.is_boolean()) ok = value.is_boolean();
    else if (def.is_number()) ok = value.is_number();
    else if (def.is_array()) ok = value.is_array();
    if (!ok)
      throw ValidationError("config key '" + key + "' has the wrong type");
    eff[key] = value;
  }

  CLI::App* app_;
  std::string title_, desc_;
  bool schema_flag_ = false;
  std::string config_path_;
  std::string out_dir_ = ".";
  json defaults_ = json::object();
  json properties_ = json::object();
  std::map<std::string, std::string> strings_;
  std::map<std::string, double> numbers_;
  std::map<std::string, long long> integers_;
  std::map<std::string, bool> booleans_;
  std::map<std::string, CLI::Option*> options_;
  std::vector<std::string> list_keys_;
};

// ------------------------------------------------------- artifact writing

std::string config_hash(const json& eff) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a(eff.dump()));
  return buf;
}

std::uint64_t seed_of(const json& eff) {
  return eff.contains("seed") ? eff["seed"].get<std::uint64_t>() : 0;
}

void write_json_artifact(const std::string& out_dir, const std::string& name,
                         const json& eff, const json& result) {
  json doc;
  doc["meta"] = {{"config", eff},
                 {"config_hash", config_hash(eff)},
                 {"seed", seed_of(eff)},
                 {"tool", kToolName},
                 {"version", kVersion}};
  doc["result"] = result;
  doc["timestamp"] = iso_timestamp();
  std::string path = (std::filesystem::path(out_dir) / name).string();
  write_text_file(path, doc.dump(2) + "\n");
  std::cout << "wrote " << path << "\n";
}

std::string csv_preamble(const json& eff) {
  std::ostringstream ss;
  ss << "# tool: " << kToolName << " " << kVersion << "\n";
  ss << "# config_hash: " << config_hash(eff) << "\n";
  ss << "# seed: " << seed_of(eff) << "\n";
  ss << "# timestamp: " << iso_timestamp() << "\n";
  return ss.str();
}

void write_csv_artifact(const std::string& out_dir, const std::string& name,
                        const json& eff, const std::string& body) {
  std::string path = (std::filesystem::path(out_dir) / name).string();
  write_text_file(path, csv_preamble(eff) + body);
  std::cout << "wrote " << path << "\n";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------- model resolution

ModelSpec resolve_cli_model(const std::string& ref) {
  if (ref.empty()) throw ValidationError("no model given (--model)");
  if (ref.rfind("builtin:", 0) == 0) return resolve_model(ref);
  if (std::filesystem::exists(ref)) return load_model_file(ref);
  std::filesystem::path bundled =
      std::filesystem::path(LDLAB_BUNDLED_MODELS_DIR) / (ref + ".json");
  if (std::filesystem::exists(bundled)) return load_model_file(bundled.string());
  for (const auto& name : builtin_model_names())
    if (name == ref) return builtin_model(name);
  throw IoError("model not found: " + ref);
}

std::function<double(double)> make_h(const std::string& expr_text,
                                     const ModelSpec& model) {
  Expr expr = Expr::parse(expr_text);
  auto params = model.params;
  return [expr, params](double x) { return expr.eval(Vec{x}, params); };
}

// ---------------------------------------------------------- result blocks

json issues_json(const ValidationReport& rep) {
  json issues = json::array();
  for (const auto& issue : rep.issues)
    issues.push_back({{"fatal", issue.fatal}, {"message", issue.message}});
  return issues;
}

json lagrangian_json(const LagrangianEval& ev) {
  json out;
  out["value"] = json_num(ev.value);
  out["status"] = to_string(ev.status);
  if (ev.argmax_p) out["argmax_p"] = vec_json(*ev.argmax_p);
  return out;
}

json trend_json(const DirectionTrend& t) {
  json out;
  out["direction"] = t.direction;
  out["verdict"] = to_string(t.verdict);
  out["inf_at_pmax"] = json_num(t.inf_at_pmax);
  out["inf_at_decade"] = json_num(t.inf_at_decade);
  out["sup_variation"] = json_num(t.sup_variation);
  out["fitted_h"] = vec_json(t.fitted_h);
  return out;
}

// ------------------------------------------------------------ subcommands

int run_model_validate(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  ValidationReport rep =
      validate_model(model, (int)eff["probe-points"].get<long long>(),
                     eff["box-span"].get<double>());
  GrowthGuardReport guard = rate_growth_guard(
      model, eff["guard-n"].get<long long>(), eff["guard-qmax"].get<long long>());
  json result;
  result["model"] = model.name;
  result["ok"] = rep.ok;
  result["issues"] = issues_json(rep);
  result["caveats"] = rep.caveats;
  result["box_lo"] = vec_json(rep.box_lo);
  result["box_hi"] = vec_json(rep.box_hi);
  result["growth_guard"] = {{"sup_ratio", json_num(guard.sup_ratio)},
                            {"fit_exponent", json_num(guard.fit_exponent)},
                            {"superlinear_warning", guard.superlinear_warning}};
  write_json_artifact(sc.out_dir(), "validate.json", eff, result);
  if (!rep.ok) {
    std::cerr << "model validation failed\n";
    return 2;
  }
  return 0;
}

int run_simulate(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  SimConfig cfg;
  cfg.n = eff["n"].get<long long>();
  cfg.T = eff["T"].get<double>();
  cfg.seed = eff["seed"].get<std::uint64_t>();
  cfg.replica = eff["replica"].get<std::uint64_t>();
  cfg.max_events = eff["max-events"].get<long long>();
  std::vector<long long> q0;
  for (const auto& v : eff["q0"]) q0.push_back((long long)std::llround(v.get<double>()));
  Trajectory traj = simulate(model, cfg, q0);

  long long negatives = 0;
  for (const auto& q : traj.states)
    for (long long c : q)
      if (c < 0) ++negatives;

  std::ostringstream csv;
  csv << "time";
  for (std::size_t d = 0; d < q0.size(); ++d) csv << ",q" << (d + 1);
  csv << ",transition_id\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    csv << fmt(i == 0 ? 0.0 : traj.event_times[i - 1]);
    for (long long c : traj.states[i]) csv << "," << c;
    csv << "," << (i == 0 ? -1 : traj.transition_ids[i - 1]) << "\n";
  }
  write_csv_artifact(sc.out_dir(), "simulate.csv", eff, csv.str());

  json result;
  result["events"] = traj.states.size() - 1;
  result["final_state"] = traj.states.back();
  result["truncated"] = traj.truncated;
  result["suppressed_exits"] = traj.suppressed_exits;
  result["negative_counts"] = negatives;
  write_json_artifact(sc.out_dir(), "simulate.json", eff, result);
  return 0;
}

int run_lln(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  std::vector<long long> n_list;
  for (const auto& v : eff["n-list"]) n_list.push_back((long long)std::llround(v.get<double>()));
  Vec x0 = eff["x0"].get<Vec>();
  if (x0.empty()) x0 = model.space.witness();
  LlnReport rep = lln_report(model, n_list, eff["T"].get<double>(),
                             (int)eff["reps"].get<long long>(),
                             eff["seed"].get<std::uint64_t>(), x0,
                             (int)eff["threads"].get<long long>());
  std::ostringstream csv;
  csv << "n,median_sup_dev,q90_sup_dev,mean_sup_dev\n";
  json entries = json::array();
  for (const auto& e : rep.entries) {
    csv << e.n << "," << fmt(e.median) << "," << fmt(e.q90) << ","
        << fmt(e.mean) << "\n";
    entries.push_back({{"n", e.n},
                       {"median", json_num(e.median)},
                       {"q90", json_num(e.q90)},
                       {"mean", json_num(e.mean)}});
  }
  write_csv_artifact(sc.out_dir(), "lln.csv", eff, csv.str());
  json result;
  result["entries"] = entries;
  result["monotone_median"] = rep.monotone_median;
  write_json_artifact(sc.out_dir(), "lln.json", eff, result);
  return 0;
}

Path straight_line_path(const Vec& from, const Vec& to, double T, int N) {
  Path path;
  path.times.resize(N + 1);
  path.states.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    double s = static_cast<double>(i) / N;
    path.times[i] = s * T;
    Vec x(from.size());
    for (std::size_t d = 0; d < from.size(); ++d)
      x[d] = from[d] + s * (to[d] - from[d]);
    path.states[i] = x;
  }
  return path;
}

Path path_from_file(const std::string& file) {
  json doc = parse_json_text(read_text_file(file), file);
  if (!doc.contains("times") || !doc.contains("states"))
    throw ValidationError("path file needs 'times' and 'states': " + file);
  Path path;
  path.times = doc["times"].get<Vec>();
  for (const auto& s : doc["states"]) path.states.push_back(s.get<Vec>());
  return path;
}

int run_action(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  HamiltonianFamily ham = build_hamiltonians(model);
  Path path;
  std::string file = eff["path-file"].get<std::string>();
  if (!file.empty()) {
    path = path_from_file(file);
  } else {
    Vec from = eff["from"].get<Vec>();
    Vec to = eff["to"].get<Vec>();
    path = straight_line_path(from, to, eff["T"].get<double>(),
                              (int)eff["segments"].get<long long>());
  }
  check_path(ham.space(), path);
  ActionReport rep = action(ham, path);

  std::ostringstream csv;
  csv << "t_mid,weight,density\n";
  for (std::size_t k = 0; k < rep.per_segment.size(); ++k) {
    double tm = 0.5 * (path.times[k] + path.times[k + 1]);
    csv << fmt(tm) << "," << fmt(rep.per_segment[k].weight) << ","
        << fmt(rep.per_segment[k].density) << "\n";
  }
  write_csv_artifact(sc.out_dir(), "action.csv", eff, csv.str());

  json result;
  result["total"] = json_num(rep.total);
  result["segments"] = rep.per_segment.size();
  result["infeasible_segments"] = rep.infeasible_segments;
  write_json_artifact(sc.out_dir(), "action.json", eff, result);
  return 0;
}

int run_minpath(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  HamiltonianFamily ham = build_hamiltonians(model);
  MinimizeOptions opts;
  opts.max_iters = (int)eff["iters"].get<long long>();
  opts.threads = (int)eff["threads"].get<long long>();
  MinimizeResult res = minimize_action(
      ham, eff["from"].get<Vec>(), eff["to"].get<Vec>(), eff["T"].get<double>(),
      (int)eff["segments"].get<long long>(), opts);

  std::ostringstream csv;
  csv << "time";
  for (std::size_t d = 0; d < res.path.states[0].size(); ++d)
    csv << ",x" << (d + 1);
  csv << "\n";
  for (std::size_t i = 0; i < res.path.states.size(); ++i) {
    csv << fmt(res.path.times[i]);
    for (double x : res.path.states[i]) csv << "," << fmt(x);
    csv << "\n";
  }
  write_csv_artifact(sc.out_dir(), "minpath.csv", eff, csv.str());

  json result;
  result["action"] = json_num(res.report.total);
  result["converged"] = res.converged;
  result["iterations"] = res.iterations;
  result["best_start_value"] = json_num(res.best_start_value);
  result["note"] = res.note;
  write_json_artifact(sc.out_dir(), "minpath.json", eff, result);
  if (!res.converged && !std::isfinite(res.report.total)) {
    std::cerr << "minimize_action found no finite-action path\n";
    return 3;
  }
  return 0;
}

int run_flow(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  HamiltonianFamily ham = build_hamiltonians(model);
  Vec x0 = eff["x0"].get<Vec>();
  if (x0.empty()) x0 = model.space.witness();
  double T = eff["T"].get<double>();
  double dt = eff["dt"].get<double>();
  std::string kind = eff["kind"].get<std::string>();
  FlowResult res;
  if (kind == "zero-cost") {
    res = zero_cost_flow(ham, x0, T, dt);
  } else if (kind == "controlled") {
    std::vector<Expr> grads;
    for (const auto& text : split_semicolons(eff["grad"].get<std::string>())) {
      if (text.empty())
        throw ValidationError("controlled flow needs --grad expressions");
      grads.push_back(Expr::parse(text));
    }
    if (grads.size() != x0.size())
      throw ValidationError("need one gradient expression per coordinate");
    auto params = model.params;
    auto field = [grads, params](const Vec& x) {
      Vec p(grads.size());
      for (std::size_t d = 0; d < grads.size(); ++d)
        p[d] = grads[d].eval(x, params);
      return p;
    };
    res = controlled_flow(ham, field, x0, T, dt);
  } else {
    throw ValidationError("flow kind must be 'zero-cost' or 'controlled'");
  }

  std::ostringstream csv;
  csv << "time";
  for (std::size_t d = 0; d < x0.size(); ++d) csv << ",x" << (d + 1);
  csv << "\n";
  for (std::size_t i = 0; i < res.path.states.size(); ++i) {
    csv << fmt(res.path.times[i]);
    for (double x : res.path.states[i]) csv << "," << fmt(x);
    csv << "\n";
  }
  write_csv_artifact(sc.out_dir(), "flow.csv", eff, csv.str());

  double min_gap = kInf;
  int in_cone = 0;
  for (const auto& cert : res.certificates) {
    min_gap = std::min(min_gap, cert.ineq_gap);
    in_cone += cert.in_tangent_cone ? 1 : 0;
  }
  json result;
  result["steps"] = res.certificates.size();
  result["projected_steps"] = res.projected_steps;
  result["in_tangent_cone"] = in_cone;
  result["min_inequality_gap"] =
      json_num(res.certificates.empty() ? 0.0 : min_gap);
  result["final_state"] = vec_json(res.path.states.back());
  write_json_artifact(sc.out_dir(), "flow.json", eff, result);
  return 0;
}

int run_legendre(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  HamiltonianFamily ham = build_hamiltonians(model);
  Vec x = eff["x"].get<Vec>();
  Vec v = eff["v"].get<Vec>();
  std::string mode = eff["mode"].get<std::string>();
  json result;
  result["x"] = vec_json(x);
  result["v"] = vec_json(v);
  result["mode"] = mode;
  if (mode == "full") {
    result["lagrangian"] = lagrangian_json(legendre_full(ham, x, v));
  } else if (mode == "piece") {
    FaceIndex J;
    std::string faces = eff["faces"].get<std::string>();
    if (!faces.empty())
      for (double f : parse_double_list(faces, "faces"))
        J.push_back((int)std::llround(f));
    result["faces"] = J;
    result["lagrangian"] = lagrangian_json(legendre_piece(ham, J, x, v));
  } else if (mode == "hull") {
    auto [value, cert] = lagrangian_hull(ham, x, v);
    result["lagrangian"] = {{"value", json_num(value)}};
    json pieces = json::array();
    for (std::size_t i = 0; i < cert.pieces.size(); ++i) {
      pieces.push_back({{"faces", cert.pieces[i]},
                        {"weight", json_num(cert.weights[i])},
                        {"velocity", vec_json(cert.velocities[i])},
                        {"cost", json_num(cert.costs[i])}});
    }
    result["certificate"] = pieces;
  } else {
    throw ValidationError("legendre mode must be 'full', 'piece' or 'hull'");
  }
  write_json_artifact(sc.out_dir(), "legendre.json", eff, result);
  return 0;
}

int run_ldp_rate(const SubConfig& sc, const json& eff) {
  std::string mode = eff["mode"].get<std::string>();
  json result;
  if (mode == "exact") {
    double rho = eff["rho"].get<double>();
    double t = eff["t"].get<double>();
    double a = eff["a"].get<double>();
    std::ostringstream csv;
    csv << "n,rate\n";
    json values = json::array();
    for (const auto& nj : eff["n-list"]) {
      long long n = (long long)std::llround(nj.get<double>());
      double r = exact_poisson_rate(rho, t, a, n);
      csv << n << "," << fmt(r) << "\n";
      values.push_back({{"n", n}, {"rate", json_num(r)}});
    }
    write_csv_artifact(sc.out_dir(), "ldp_rate.csv", eff, csv.str());
    result["mode"] = "exact";
    result["values"] = values;
    result["limit"] = json_num(poisson_rate_limit(rho, t, a));
  } else if (mode == "mc") {
    ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
    EventPredicate pred;
    std::string kind = eff["event"].get<std::string>();
    if (kind == "terminal-above") pred.kind = EventPredicate::Kind::terminal_above;
    else if (kind == "terminal-below") pred.kind = EventPredicate::Kind::terminal_below;
    else throw ValidationError("event must be 'terminal-above' or 'terminal-below'");
    pred.coord = (int)eff["coord"].get<long long>();
    pred.threshold = eff["threshold"].get<double>();
    McRateResult mc = mc_rate(model, pred, eff["n"].get<long long>(),
                              eff["reps"].get<long long>(),
                              eff["seed"].get<std::uint64_t>(),
                              eff["x0"].get<Vec>(), eff["T"].get<double>(),
                              (int)eff["threads"].get<long long>());
    result["mode"] = "mc";
    result["n"] = mc.n;
    result["reps"] = mc.reps;
    result["hits"] = mc.hits;
    result["p_hat"] = json_num(mc.p_hat);
    result["wilson_lo"] = json_num(mc.wilson_lo);
    result["wilson_hi"] = json_num(mc.wilson_hi);
    result["estimate"] = json_num(mc.estimate);
    result["rate_lo"] = json_num(mc.rate_lo);
    result["rate_hi"] = json_num(mc.rate_hi);
  } else {
    throw ValidationError("ldp-rate mode must be 'exact' or 'mc'");
  }
  write_json_artifact(sc.out_dir(), "ldp_rate.json", eff, result);
  return 0;
}

json containment_json(const ContainmentReport& rep) {
  json rays = json::array();
  for (const auto& ray : rep.rays) {
    rays.push_back({{"direction", vec_json(ray.direction)},
                    {"toward_open_face", ray.toward_open_face},
                    {"face", ray.face},
                    {"escaping", ray.escaping},
                    {"increasing", ray.increasing},
                    {"first_value", json_num(ray.first_value)},
                    {"last_value", json_num(ray.last_value)}});
  }
  json out;
  out["ok"] = rep.ok;
  out["nonneg_ok"] = rep.nonneg_ok;
  out["min_value"] = json_num(rep.min_value);
  out["min_arg"] = vec_json(rep.min_arg);
  out["zero_point_ok"] = rep.zero_point_ok;
  out["value_at_x0"] = json_num(rep.value_at_x0);
  out["compact_ok"] = rep.compact_ok;
  out["rays"] = rays;
  out["sup_h"] = json_num(rep.sup_h);
  out["argmax"] = vec_json(rep.argmax);
  out["shell_sup"] = vec_json(Vec(rep.shell_sup.begin(), rep.shell_sup.end()));
  out["sup_divergence"] = rep.sup_divergence;
  out["usable_points"] = rep.usable_points;
  out["domain_errors"] = rep.domain_errors;
  return out;
}

int run_check_conditions(const SubConfig& sc, const json& eff) {
  std::string kind = eff["kind"].get<std::string>();
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  json result;
  result["kind"] = kind;
  result["model"] = model.name;

  auto probe_spec = [&]() {
    ProbeSpec probe;
    probe.lo = eff["box-lo"].get<Vec>();
    probe.hi = eff["box-hi"].get<Vec>();
    probe.points = (int)eff["points"].get<long long>();
    probe.ray_points = (int)eff["ray-points"].get<long long>();
    return probe;
  };
  auto candidate = [&]() {
    std::string upsilon = eff["upsilon"].get<std::string>();
    if (upsilon.empty())
      throw ValidationError("containment checks need --upsilon");
    return make_candidate(upsilon,
                          split_semicolons(eff["grad"].get<std::string>()),
                          eff["x0"].get<Vec>(), model.params);
  };

  if (kind == "containment") {
    HamiltonianFamily ham = build_hamiltonians(model);
    result["report"] = containment_json(check_containment(ham, candidate(),
                                                          probe_spec()));
  } else if (kind == "offspring") {
    OffspringMomentReport rep =
        check_offspring_moment(model, eff["alpha"].get<double>(), probe_spec());
    result["report"] = {{"alpha", json_num(rep.alpha)},
                        {"sup_value", json_num(rep.sup_value)},
                        {"argmax", vec_json(rep.argmax)},
                        {"divergent", rep.divergent},
                        {"worst_tail_fraction", json_num(rep.worst_tail_fraction)},
                        {"truncation_dominated", rep.truncation_dominated},
                        {"usable_points", rep.usable_points},
                        {"ok", rep.ok}};
  } else if (kind == "interior") {
    HamiltonianFamily ham = build_hamiltonians(model);
    InteriorConditionReport rep = check_interior_condition(
        ham, eff["k-lo"].get<double>(), eff["k-hi"].get<double>(),
        eff["p-max"].get<double>());
    json signs = json::array();
    for (const auto& s : rep.boundary_signs) {
      signs.push_back({{"face", s.face},
                       {"ok", s.ok},
                       {"worst_violation", json_num(s.worst_violation)},
                       {"worst_p", json_num(s.worst_p)}});
    }
    result["report"] = {{"minus", trend_json(rep.minus)},
                        {"plus", trend_json(rep.plus)},
                        {"boundary_signs", signs}};
  } else if (kind == "boundary") {
    HamiltonianFamily ham = build_hamiltonians(model);
    BoundaryConditionReport rep = check_boundary_condition(
        ham, (int)eff["face"].get<long long>(),
        (int)eff["direction"].get<long long>(), eff["k-lo"].get<double>(),
        eff["k-hi"].get<double>(), eff["p-max"].get<double>());
    json entries = json::array();
    for (const auto& e : rep.weak2_entries)
      entries.push_back({{"c", json_num(e.c)},
                         {"q", json_num(e.q)},
                         {"alpha", json_num(e.alpha)},
                         {"value", json_num(e.value)}});
    result["report"] = {{"verdict", to_string(rep.verdict)},
                        {"face", rep.face},
                        {"direction", rep.direction},
                        {"heuristic", rep.heuristic},
                        {"trend", trend_json(rep.trend)},
                        {"weak2_sup", json_num(rep.weak2_sup)},
                        {"weak2_entries", entries},
                        {"note", rep.note}};
  } else if (kind == "orthant") {
    HamiltonianFamily ham = build_hamiltonians(model);
    OrthantConditionReport rep = check_orthant_condition(
        ham, eff["box-lo"].get<Vec>(), eff["box-hi"].get<Vec>(),
        (int)eff["points"].get<long long>());
    result["report"] = {{"case", std::string(1, rep.case_verdict)},
                        {"fitted_m", json_num(rep.fitted_m)},
                        {"lower_bound_ok", rep.lower_bound_ok},
                        {"c1_bound_m", json_num(rep.c1_bound_m)},
                        {"c1_bound_ok", rep.c1_bound_ok},
                        {"immigration_min", vec_json(Vec(rep.immigration_min.begin(), rep.immigration_min.end()))},
                        {"harvesting_min", vec_json(Vec(rep.harvesting_min.begin(), rep.harvesting_min.end()))},
                        {"rates_positive", rep.rates_positive},
                        {"superlinear", rep.superlinear},
                        {"superlinear_ratio", json_num(rep.superlinear_ratio)}};
  } else if (kind == "confinement") {
    HamiltonianFamily ham = build_hamiltonians(model);
    ConfinementReport rep = apriori_confinement(
        ham, candidate(), eff["k-lo-box"].get<Vec>(), eff["k-hi-box"].get<Vec>(),
        eff["T"].get<double>(), eff["M"].get<double>(), probe_spec());
    json reached = json::array();
    for (bool r : rep.reached) reached.push_back(r);
    result["report"] = {{"c", json_num(rep.c)},
                        {"sup_upsilon_k", json_num(rep.sup_upsilon_k)},
                        {"sup_h", json_num(rep.sup_h)},
                        {"box_lo", vec_json(rep.box_lo)},
                        {"box_hi", vec_json(rep.box_hi)},
                        {"reached", reached}};
  } else {
    throw ValidationError(
        "conditions kind must be one of: containment, offspring, interior, "
        "boundary, orthant, confinement");
  }
  write_json_artifact(sc.out_dir(), "conditions.json", eff, result);
  return 0;
}

int run_hj_solve(const SubConfig& sc, const json& eff) {
  ModelSpec model = resolve_cli_model(eff["model"].get<std::string>());
  HamiltonianFamily ham = build_hamiltonians(model);
  auto h = make_h(eff["rhs"].get<std::string>(), model);
  double lambda = eff["lambda"].get<double>();
  double lo = eff["lo"].get<double>(), hi = eff["hi"].get<double>();
  int max_iters = (int)eff["max-iters"].get<long long>();
  double tol = eff["tol"].get<double>();
  std::string mode = eff["mode"].get<std::string>();
  json result;
  result["mode"] = mode;

  if (mode == "solve") {
    Grid1D grid =
        make_grid(ham, lo, hi, (int)eff["segments"].get<long long>());
    HjSolution fd =
        solve_resolvent(ham, lambda, h, grid, HjVariant::dagger, max_iters, tol);
    HjSolution fdd = solve_resolvent(ham, lambda, h, grid, HjVariant::ddagger,
                                     max_iters, tol);
    std::ostringstream csv;
    csv << "x,h,f_dagger,f_ddagger,sponge\n";
    double gap = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      csv << fmt(grid.nodes[i]) << "," << fmt(h(grid.nodes[i])) << ","
          << fmt(fd.f[i]) << "," << fmt(fdd.f[i]) << ","
          << (grid.in_sponge(i) ? 1 : 0) << "\n";
      if (!grid.in_sponge(i)) gap = std::max(gap, std::fabs(fd.f[i] - fdd.f[i]));
    }
    write_csv_artifact(sc.out_dir(), "hj.csv", eff, csv.str());
    result["dagger"] = {{"converged", fd.converged},
                        {"iterations", fd.iterations},
                        {"residual", json_num(fd.residual)}};
    result["ddagger"] = {{"converged", fdd.converged},
                         {"iterations", fdd.iterations},
                         {"residual", json_num(fdd.residual)}};
    result["sup_gap_nonsponge"] = json_num(gap);
    write_json_artifact(sc.out_dir(), "hj.json", eff, result);
    if (!fd.converged || !fdd.converged) {
      std::cerr << "resolvent iteration did not reach tolerance\n";
      return 3;
    }
  } else if (mode == "probe") {
    std::vector<int> refinements;
    for (const auto& r : eff["refinements"])
      refinements.push_back((int)std::llround(r.get<double>()));
    ComparisonProbe probe =
        comparison_probe(ham, lambda, h, lo, hi, refinements);
    std::ostringstream csv;
    csv << "segments,h_x,gap,converged\n";
    json levels = json::array();
    for (const auto& lv : probe.levels) {
      csv << lv.segments << "," << fmt(lv.h_x) << "," << fmt(lv.gap) << ","
          << (lv.converged ? 1 : 0) << "\n";
      levels.push_back({{"segments", lv.segments},
                        {"h_x", json_num(lv.h_x)},
                        {"gap", json_num(lv.gap)},
                        {"converged", lv.converged}});
    }
    write_csv_artifact(sc.out_dir(), "hj.csv", eff, csv.str());
    result["levels"] = levels;
    result["ratios"] = vec_json(Vec(probe.ratios.begin(), probe.ratios.end()));
    result["consistent"] = probe.consistent;
    result["note"] = probe.note;
    write_json_artifact(sc.out_dir(), "hj.json", eff, result);
  } else if (mode == "variational") {
    VariationalPoint vp = variational_resolvent_point(
        ham, lambda, h, eff["x"].get<double>(), eff["horizon"].get<double>(),
        (int)eff["knots"].get<long long>());
    std::ostringstream csv;
    csv << "time,x\n";
    for (std::size_t i = 0; i < vp.path_states.size(); ++i)
      csv << fmt(vp.path_times[i]) << "," << fmt(vp.path_states[i]) << "\n";
    write_csv_artifact(sc.out_dir(), "hj.csv", eff, csv.str());
    result["value"] = json_num(vp.value);
    result["tail"] = json_num(vp.tail);
    result["converged"] = vp.converged;
    write_json_artifact(sc.out_dir(), "hj.json", eff, result);
  } else {
    throw ValidationError("hj mode must be 'solve', 'probe' or 'variational'");
  }
  return 0;
}

int run_demo_yule(const SubConfig& sc, const json& eff) {
  FailureDemoReport rep = failure_demo(
      eff["replicas"].get<long long>(), eff["n"].get<long long>(),
      (int)eff["segments"].get<long long>(), (int)eff["threads"].get<long long>());
  json result;
  result["path_action"] = json_num(rep.path_action);
  result["action_target"] = json_num(rep.action_target);
  result["segments"] = rep.segments;
  result["n"] = rep.n;
  result["replicas"] = rep.replicas;
  result["hits"] = rep.hits;
  result["note"] = rep.note;
  write_json_artifact(sc.out_dir(), "demo_yule_failure.json", eff, result);
  std::cout << "action " << rep.path_action << " vs target "
            << rep.action_target << "; hits " << rep.hits << " of "
            << rep.replicas << " replicas\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for population jump processes: "
               "simulation, action functionals, condition checks, and "
               "Hamilton-Jacobi resolvent machinery"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

  // ---- model validate
  CLI::App* model_cmd = app.add_subcommand("model", "model file utilities");
  model_cmd->require_subcommand(1);
  CLI::App* validate_cmd =
      model_cmd->add_subcommand("validate", "structural and numeric checks");
  SubConfig validate_sc(validate_cmd, "ldlab model validate",
                        "validate a model file or builtin");
  validate_sc.add_string("model", "", "model name, path, or builtin:<name>");
  validate_sc.add_integer("probe-points", 10000, "rate probe grid size");
  validate_sc.add_number("box-span", 10.0, "probe box half-width");
  validate_sc.add_integer("guard-n", 1000, "scale for the rate growth guard");
  validate_sc.add_integer("guard-qmax", 50, "lattice radius for the guard");

  // ---- simulate
  CLI::App* sim_cmd = app.add_subcommand("simulate", "exact jump-chain sample");
  SubConfig sim_sc(sim_cmd, "ldlab simulate", "one stochastic trajectory");
  sim_sc.add_string("model", "", "model name, path, or builtin:<name>");
  sim_sc.add_integer("n", 100, "population scale");
  sim_sc.add_number("T", 1.0, "time horizon");
  sim_sc.add_integer("seed", 1, "RNG seed");
  sim_sc.add_integer("replica", 0, "replica id (stream separation)");
  sim_sc.add_integer("max-events", 1000000, "event cap");
  sim_sc.add_number_list("q0", {}, "initial counts (one per coordinate)");

  // ---- lln
  CLI::App* lln_cmd =
      app.add_subcommand("lln", "sup-deviation from the zero-cost flow");
  SubConfig lln_sc(lln_cmd, "ldlab lln",
                   "law-of-large-numbers deviation statistics");
  lln_sc.add_string("model", "", "model name, path, or builtin:<name>");
  lln_sc.add_number_list("n-list", {1000, 4000}, "population scales");
  lln_sc.add_number("T", 1.0, "time horizon");
  lln_sc.add_integer("reps", 50, "replicas per scale");
  lln_sc.add_integer("seed", 1, "RNG seed");
  lln_sc.add_number_list("x0", {}, "initial density, one per coordinate (default: interior witness of the model space)");
  lln_sc.add_integer("threads", default_threads(), "worker threads");

  // ---- action
  CLI::App* action_cmd =
      app.add_subcommand("action", "action integral of a given path");
  SubConfig action_sc(action_cmd, "ldlab action",
                      "midpoint-rule action of a discretized path");
  action_sc.add_string("model", "", "model name, path, or builtin:<name>");
  action_sc.add_string("path-file", "",
                       "JSON file with 'times' and 'states' (overrides "
                       "from/to)");
  action_sc.add_number_list("from", {}, "start state (straight-line mode)");
  action_sc.add_number_list("to", {}, "end state (straight-line mode)");
  action_sc.add_number("T", 1.0, "duration (straight-line mode)");
  action_sc.add_integer("segments", 1000, "segments (straight-line mode)");

  // ---- minpath
  CLI::App* min_cmd =
      app.add_subcommand("minpath", "fixed-endpoint action minimization");
  SubConfig min_sc(min_cmd, "ldlab minpath", "minimize the action integral");
  min_sc.add_string("model", "", "model name, path, or builtin:<name>");
  min_sc.add_number_list("from", {}, "start state");
  min_sc.add_number_list("to", {}, "end state");
  min_sc.add_number("T", 1.0, "duration");
  min_sc.add_integer("segments", 40, "path segments");
  min_sc.add_integer("iters", 400, "descent iteration cap");
  min_sc.add_integer("threads", default_threads(), "worker threads");

  // ---- flow
  CLI::App* flow_cmd =
      app.add_subcommand("flow", "zero-cost or controlled flow integration");
  SubConfig flow_sc(flow_cmd, "ldlab flow", "explicit Euler flow integration");
  flow_sc.add_string("model", "", "model name, path, or builtin:<name>");
  flow_sc.add_string("kind", "zero-cost", "'zero-cost' or 'controlled'");
  flow_sc.add_number_list("x0", {}, "initial state (default: interior witness of the model space)");
  flow_sc.add_number("T", 1.0, "time horizon");
  flow_sc.add_number("dt", 0.01, "step size");
  flow_sc.add_string("grad", "",
                     "semicolon-separated momentum field expressions "
                     "(controlled mode)");

  // ---- legendre
  CLI::App* leg_cmd =
      app.add_subcommand("legendre", "action density L(x, v) evaluations");
  SubConfig leg_sc(leg_cmd, "ldlab legendre",
                   "Legendre transform and hull evaluations");
  leg_sc.add_string("model", "", "model name, path, or builtin:<name>");
  leg_sc.add_string("mode", "full", "'full', 'piece' or 'hull'");
  leg_sc.add_number_list("x", {}, "state");
  leg_sc.add_number_list("v", {}, "velocity");
  leg_sc.add_string("faces", "", "comma-separated face indices (piece mode)");

  // ---- ldp-rate
  CLI::App* rate_cmd =
      app.add_subcommand("ldp-rate", "large-deviation rate verification");
  SubConfig rate_sc(rate_cmd, "ldlab ldp-rate",
                    "exact tail exponents and Monte Carlo rate estimates");
  rate_sc.add_string("mode", "exact", "'exact' or 'mc'");
  rate_sc.add_number("rho", 1.0, "immigration rate (exact mode)");
  rate_sc.add_number("t", 1.0, "time (exact mode)");
  rate_sc.add_number("a", 2.0, "tail threshold (exact mode)");
  rate_sc.add_number_list("n-list", {100, 1000, 10000}, "scales (exact mode)");
  rate_sc.add_string("model", "", "model (mc mode)");
  rate_sc.add_string("event", "terminal-above",
                     "'terminal-above' or 'terminal-below' (mc mode)");
  rate_sc.add_integer("coord", 0, "coordinate index (mc mode)");
  rate_sc.add_number("threshold", 1.3, "event threshold (mc mode)");
  rate_sc.add_integer("n", 20, "population scale (mc mode)");
  rate_sc.add_integer("reps", 20000, "replicas (mc mode)");
  rate_sc.add_integer("seed", 1, "RNG seed (mc mode)");
  rate_sc.add_number_list("x0", {1}, "initial density (mc mode)");
  rate_sc.add_number("T", 1.0, "horizon (mc mode)");
  rate_sc.add_integer("threads", default_threads(), "worker threads");

  // ---- check conditions
  CLI::App* check_cmd = app.add_subcommand("check", "condition checkers");
  check_cmd->require_subcommand(1);
  CLI::App* cond_cmd = check_cmd->add_subcommand(
      "conditions", "containment / tail / boundary / orthant probes");
  SubConfig cond_sc(cond_cmd, "ldlab check conditions",
                    "numeric probes of the comparison-principle conditions");
  cond_sc.add_string("model", "", "model name, path, or builtin:<name>");
  cond_sc.add_string("kind", "interior",
                     "'containment', 'offspring', 'interior', 'boundary', "
                     "'orthant' or 'confinement'");
  cond_sc.add_string("upsilon", "", "containment candidate expression");
  cond_sc.add_string("grad", "",
                     "semicolon-separated candidate partial derivatives");
  cond_sc.add_number_list("x0", {1}, "candidate zero point");
  cond_sc.add_number("alpha", 1.0, "offspring moment parameter");
  cond_sc.add_number("k-lo", 0.5, "compact set lower end (1d checks)");
  cond_sc.add_number("k-hi", 2.0, "compact set upper end (1d checks)");
  cond_sc.add_number("p-max", 40.0, "momentum probe magnitude");
  cond_sc.add_integer("face", 0, "closed face index (boundary check)");
  cond_sc.add_integer("direction", 1, "escape direction +1 or -1");
  cond_sc.add_number_list("box-lo", {0}, "probe box lower corner");
  cond_sc.add_number_list("box-hi", {10}, "probe box upper corner");
  cond_sc.add_integer("points", 2048, "probe grid size");
  cond_sc.add_integer("ray-points", 10, "samples per escape ray");
  cond_sc.add_number_list("k-lo-box", {0}, "compact box lower corner "
                          "(confinement)");
  cond_sc.add_number_list("k-hi-box", {2}, "compact box upper corner "
                          "(confinement)");
  cond_sc.add_number("T", 1.0, "horizon (confinement)");
  cond_sc.add_number("M", 1.0, "value bound (confinement)");

  // ---- hj solve
  CLI::App* hj_cmd = app.add_subcommand("hj", "Hamilton-Jacobi machinery");
  hj_cmd->require_subcommand(1);
  CLI::App* hj_solve_cmd = hj_cmd->add_subcommand(
      "solve", "monotone scheme for f - lambda H(x, f') = h");
  SubConfig hj_sc(hj_solve_cmd, "ldlab hj solve",
                  "resolvent solves, refinement probes, variational points");
  hj_sc.add_string("model", "", "model name, path, or builtin:<name>");
  hj_sc.add_string("mode", "solve", "'solve', 'probe' or 'variational'");
  hj_sc.add_number("lambda", 0.5, "resolvent parameter");
  hj_sc.add_string("rhs", "sin(x1)*exp(-x1)", "right-hand side h(x1)");
  hj_sc.add_number("lo", 0.0, "interval lower end");
  hj_sc.add_number("hi", 6.0, "interval upper end");
  hj_sc.add_integer("segments", 80, "grid segments (solve mode)");
  hj_sc.add_number_list("refinements", {40, 80, 160},
                        "grid levels (probe mode)");
  hj_sc.add_integer("max-iters", 40000, "sweep cap");
  hj_sc.add_number("tol", 1e-10, "fixed-point residual tolerance");
  hj_sc.add_number("x", 1.0, "evaluation state (variational mode)");
  hj_sc.add_number("horizon", 15.0, "path horizon (variational mode)");
  hj_sc.add_integer("knots", 24, "path knots (variational mode)");

  // ---- demo yule-failure
  CLI::App* demo_cmd = app.add_subcommand("demo", "worked demonstrations");
  demo_cmd->require_subcommand(1);
  CLI::App* yule_cmd = demo_cmd->add_subcommand(
      "yule-failure",
      "finite interior action vs. an unreachable boundary event");
  SubConfig yule_sc(yule_cmd, "ldlab demo yule-failure",
                    "pure-birth boundary failure demonstration");
  yule_sc.add_integer("replicas", 1000000, "simulated replicas");
  yule_sc.add_integer("n", 100, "population scale");
  yule_sc.add_integer("segments", 10000, "quadrature segments");
  yule_sc.add_integer("threads", default_threads(), "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  struct Runner {
    CLI::App* cmd;
    SubConfig* sc;
    int (*fn)(const SubConfig&, const json&);
  };
  const Runner runners[] = {
      {validate_cmd, &validate_sc, run_model_validate},
      {sim_cmd, &sim_sc, run_simulate},
      {lln_cmd, &lln_sc, run_lln},
      {action_cmd, &action_sc, run_action},
      {min_cmd, &min_sc, run_minpath},
      {flow_cmd, &flow_sc, run_flow},
      {leg_cmd, &leg_sc, run_legendre},
      {rate_cmd, &rate_sc, run_ldp_rate},
      {cond_cmd, &cond_sc, run_check_conditions},
      {hj_solve_cmd, &hj_sc, run_hj_solve},
      {yule_cmd, &yule_sc, run_demo_yule},
  };

  try {
    for (const auto& r : runners) {
      if (!r.cmd->parsed()) continue;
      if (r.sc->schema_requested()) {
        std::cout << r.sc->schema().dump(2) << "\n";
        return 0;
      }
      return r.fn(*r.sc, r.sc->effective());
    }
    std::cout << app.help() << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ExprError& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
