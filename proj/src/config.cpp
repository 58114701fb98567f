#include "seqcal/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include "seqcal/csv.hpp"
#include "seqcal/rng.hpp"
#include "seqcal/testbed.hpp"

namespace seqcal {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) throw ConfigError(std::string(where) + ": unknown key \"" + it.key() + "\"");
  }
}

const json& member(const json& obj, const char* key) { return obj.at(key); }

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(where + " must be a nonnegative integer");
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_double_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_double(e, where + " entry"));
  return out;
}

std::vector<int> as_int_list(const json& v, const std::string& where) {
  std::vector<int> out;
  if (v.is_number_integer()) {
    out.push_back(v.get<int>());
  } else if (v.is_array()) {
    for (const auto& e : v) out.push_back(as_int(e, where + " entry"));
  } else {
    throw ConfigError(where + " must be an integer or an array of integers");
  }
  if (out.empty()) throw ConfigError(where + " must not be empty");
  return out;
}

template <typename Enum>
Enum parse_enum(const std::string& text, const std::string& where,
                std::initializer_list<std::pair<const char*, Enum>> table) {
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  std::string names;
  for (const auto& [name, value] : table) {
    (void)value;
    if (!names.empty()) names += ", ";
    names += name;
  }
  throw ConfigError(where + ": \"" + text + "\" is not one of " + names);
}

void apply_curve_json(CurveSpec& curve, const json& doc) {
  require_keys(doc, "curve", {"kind", "a_n", "n", "table", "a_n_by_b"});
  if (doc.contains("kind")) {
    curve.kind = parse_enum<CurveKind>(as_string(member(doc, "kind"), "curve.kind"), "curve.kind",
                                       {{"exponential", CurveKind::Exponential},
                                        {"empirical", CurveKind::Empirical}});
  }
  if (doc.contains("a_n")) curve.exponent = as_double(member(doc, "a_n"), "curve.a_n");
  if (doc.contains("n")) {
    const int total = as_int(member(doc, "n"), "curve.n");
    if (total < 1) throw ConfigError("curve.n must be positive");
    curve.total = static_cast<std::size_t>(total);
  }
  if (doc.contains("table")) {
    const json& table = member(doc, "table");
    if (!table.is_array()) throw ConfigError("curve.table must be an array of [j, error] pairs");
    curve.table.clear();
    for (const auto& row : table) {
      if (!row.is_array() || row.size() != 2)
        throw ConfigError("curve.table rows must be [j, error] pairs");
      const int j = as_int(row[0], "curve.table j");
      if (j < 0) throw ConfigError("curve.table j must be nonnegative");
      curve.table.emplace_back(static_cast<std::size_t>(j),
                               as_double(row[1], "curve.table error"));
    }
  }
  if (doc.contains("a_n_by_b")) {
    const json& overrides = member(doc, "a_n_by_b");
    if (!overrides.is_object()) throw ConfigError("curve.a_n_by_b must be an object");
    curve.exponent_by_batch.clear();
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
      char* end = nullptr;
      errno = 0;
      const long b = std::strtol(it.key().c_str(), &end, 10);
      if (errno != 0 || end == it.key().c_str() || *end != '\0' || b < 1)
        throw ConfigError("curve.a_n_by_b keys must be positive batch sizes, got \"" + it.key() +
                          "\"");
      curve.exponent_by_batch[static_cast<int>(b)] =
          as_double(it.value(), "curve.a_n_by_b[" + it.key() + "]");
    }
  }
}

void apply_acq_time_json(AcqTimeModel& model, const json& doc) {
  require_keys(doc, "acq_time", {"kind", "a", "b", "c", "tail", "measured"});
  if (doc.contains("kind")) {
    model.kind = parse_enum<AcqTimeKind>(as_string(member(doc, "kind"), "acq_time.kind"),
                                         "acq_time.kind",
                                         {{"constant", AcqTimeKind::Constant},
                                          {"linear", AcqTimeKind::Linear},
                                          {"quadratic", AcqTimeKind::Quadratic}});
  }
  if (doc.contains("a")) model.a = as_double(member(doc, "a"), "acq_time.a");
  if (doc.contains("b")) model.b = as_double(member(doc, "b"), "acq_time.b");
  if (doc.contains("c")) model.c = as_double(member(doc, "c"), "acq_time.c");
  if (doc.contains("tail")) model.tail_constant = as_double(member(doc, "tail"), "acq_time.tail");
  if (doc.contains("measured")) {
    model.measured = as_double_vector(member(doc, "measured"), "acq_time.measured");
  }
}

void apply_run_time_json(RunTimeModel& model, const json& doc) {
  require_keys(doc, "run_time", {"kind", "mean", "std", "floor", "seed"});
  if (doc.contains("kind")) {
    model.kind = parse_enum<RunTimeKind>(as_string(member(doc, "kind"), "run_time.kind"),
                                         "run_time.kind",
                                         {{"constant", RunTimeKind::Constant},
                                          {"truncated-normal", RunTimeKind::TruncatedNormal}});
  }
  if (doc.contains("mean")) model.mean = as_double(member(doc, "mean"), "run_time.mean");
  if (doc.contains("std")) model.stddev = as_double(member(doc, "std"), "run_time.std");
  if (doc.contains("floor")) model.floor = as_double(member(doc, "floor"), "run_time.floor");
  if (doc.contains("seed")) model.seed = as_u64(member(doc, "seed"), "run_time.seed");
}

}  // namespace

json load_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(file.string() + ": top level must be an object");
  return doc;
}

const json& unwrap_manifest(const json& doc, const std::string& command) {
  if (doc.contains("command") && doc.contains("config")) {
    const std::string recorded = as_string(doc.at("command"), "manifest command");
    if (recorded != command)
      throw ConfigError("manifest records a \"" + recorded + "\" run, not \"" + command + "\"");
    if (!doc.at("config").is_object()) throw ConfigError("manifest config must be an object");
    return doc.at("config");
  }
  return doc;
}

void apply_design_json(DesignConfig& config, const json& doc) {
  require_keys(doc, "design config",
               {"problem", "acq", "n", "n0", "b", "w", "candidates", "ref_size", "liar",
                "eivar_on_even", "replicates", "seed", "mad", "mad_grid", "clock", "out"});
  if (doc.contains("problem")) {
    const json& problem = member(doc, "problem");
    if (problem.is_string()) {
      config.problem = problem.get<std::string>();
      config.custom.reset();
    } else if (problem.is_object()) {
      require_keys(problem, "problem", {"function", "lower", "upper", "y", "sigma2"});
      CustomProblem custom;
      custom.function = as_string(member(problem, "function"), "problem.function");
      if (problem.contains("lower"))
        custom.lower = as_double_vector(member(problem, "lower"), "problem.lower");
      if (problem.contains("upper"))
        custom.upper = as_double_vector(member(problem, "upper"), "problem.upper");
      if (problem.contains("y")) custom.y = as_double(member(problem, "y"), "problem.y");
      if (problem.contains("sigma2"))
        custom.noise_var = as_double(member(problem, "sigma2"), "problem.sigma2");
      config.problem = custom.function;
      config.custom = std::move(custom);
    } else {
      throw ConfigError("problem must be a name or an object");
    }
  }
  if (doc.contains("acq"))
    config.spec.kind = acq_kind_from_string(as_string(member(doc, "acq"), "acq"));
  if (doc.contains("n")) config.n = as_int(member(doc, "n"), "n");
  if (doc.contains("n0")) config.n0 = as_int(member(doc, "n0"), "n0");
  if (doc.contains("b")) config.b = as_int(member(doc, "b"), "b");
  if (doc.contains("w")) config.w = as_int(member(doc, "w"), "w");
  if (doc.contains("candidates"))
    config.spec.candidate_count = as_int(member(doc, "candidates"), "candidates");
  if (doc.contains("ref_size"))
    config.spec.reference_count = as_int(member(doc, "ref_size"), "ref_size");
  if (doc.contains("liar"))
    config.spec.liar = liar_rule_from_string(as_string(member(doc, "liar"), "liar"));
  if (doc.contains("eivar_on_even"))
    config.spec.eivar_on_even = as_bool(member(doc, "eivar_on_even"), "eivar_on_even");
  if (doc.contains("replicates")) config.replicates = as_int(member(doc, "replicates"), "replicates");
  if (doc.contains("seed")) config.seed = as_u64(member(doc, "seed"), "seed");
  if (doc.contains("mad")) config.mad = as_bool(member(doc, "mad"), "mad");
  if (doc.contains("mad_grid")) config.mad_grid = as_int(member(doc, "mad_grid"), "mad_grid");
  if (doc.contains("clock"))
    config.clock = clock_mode_from_string(as_string(member(doc, "clock"), "clock"));
  if (doc.contains("out")) config.out = as_string(member(doc, "out"), "out");
}

void apply_perf_json(PerfConfig& config, const json& doc) {
  require_keys(doc, "perf config",
               {"curve", "acq_time", "run_time", "b", "w", "alpha", "replicates", "acq_label",
                "seed", "out"});
  if (doc.contains("curve")) apply_curve_json(config.curve, member(doc, "curve"));
  if (doc.contains("acq_time")) apply_acq_time_json(config.acq, member(doc, "acq_time"));
  if (doc.contains("run_time")) apply_run_time_json(config.run, member(doc, "run_time"));
  if (doc.contains("b")) config.batch_sizes = as_int_list(member(doc, "b"), "b");
  if (doc.contains("w")) config.worker_counts = as_int_list(member(doc, "w"), "w");
  if (doc.contains("alpha")) config.alpha = as_double(member(doc, "alpha"), "alpha");
  if (doc.contains("replicates")) config.replicates = as_int(member(doc, "replicates"), "replicates");
  if (doc.contains("acq_label")) config.acq_label = as_string(member(doc, "acq_label"), "acq_label");
  if (doc.contains("seed")) config.seed = as_u64(member(doc, "seed"), "seed");
  if (doc.contains("out")) config.out = as_string(member(doc, "out"), "out");
}

json design_to_json(const DesignConfig& config) {
  json doc;
  if (config.custom) {
    json problem;
    problem["function"] = config.custom->function;
    problem["lower"] = config.custom->lower;
    problem["upper"] = config.custom->upper;
    if (config.custom->y) problem["y"] = *config.custom->y;
    if (config.custom->noise_var) problem["sigma2"] = *config.custom->noise_var;
    doc["problem"] = std::move(problem);
  } else {
    doc["problem"] = config.problem;
  }
  doc["acq"] = to_string(config.spec.kind);
  doc["n"] = config.n;
  doc["n0"] = config.n0;
  doc["b"] = config.b;
  doc["w"] = config.w;
  doc["candidates"] = config.spec.candidate_count;
  doc["ref_size"] = config.spec.reference_count;
  doc["liar"] = to_string(config.spec.liar);
  doc["eivar_on_even"] = config.spec.eivar_on_even;
  doc["replicates"] = config.replicates;
  doc["seed"] = config.seed;
  doc["mad"] = config.mad;
  doc["mad_grid"] = config.mad_grid;
  doc["clock"] = to_string(config.clock);
  doc["out"] = config.out;
  return doc;
}

json perf_to_json(const PerfConfig& config) {
  json curve;
  curve["kind"] = config.curve.kind == CurveKind::Empirical ? "empirical" : "exponential";
  curve["a_n"] = config.curve.exponent;
  curve["n"] = config.curve.total;
  if (!config.curve.table.empty()) {
    json table = json::array();
    for (const auto& [j, err] : config.curve.table) table.push_back({j, err});
    curve["table"] = std::move(table);
  }
  if (!config.curve.exponent_by_batch.empty()) {
    json overrides = json::object();
    for (const auto& [b, a] : config.curve.exponent_by_batch) overrides[std::to_string(b)] = a;
    curve["a_n_by_b"] = std::move(overrides);
  }

  json acq;
  switch (config.acq.kind) {
    case AcqTimeKind::Constant: acq["kind"] = "constant"; break;
    case AcqTimeKind::Linear: acq["kind"] = "linear"; break;
    case AcqTimeKind::Quadratic: acq["kind"] = "quadratic"; break;
  }
  acq["a"] = config.acq.a;
  acq["b"] = config.acq.b;
  acq["c"] = config.acq.c;
  acq["tail"] = config.acq.tail_constant;
  if (!config.acq.measured.empty()) acq["measured"] = config.acq.measured;

  json run;
  run["kind"] = config.run.kind == RunTimeKind::TruncatedNormal ? "truncated-normal" : "constant";
  run["mean"] = config.run.mean;
  run["std"] = config.run.stddev;
  run["floor"] = config.run.floor;
  run["seed"] = config.run.seed;

  json doc;
  doc["curve"] = std::move(curve);
  doc["acq_time"] = std::move(acq);
  doc["run_time"] = std::move(run);
  doc["b"] = config.batch_sizes;
  doc["w"] = config.worker_counts;
  doc["alpha"] = config.alpha;
  doc["replicates"] = config.replicates;
  doc["acq_label"] = config.acq_label;
  doc["seed"] = config.seed;
  doc["out"] = config.out;
  return doc;
}

CalibrationProblem make_problem(const DesignConfig& config) {
  CalibrationProblem problem = [&] {
    try {
      return testbed::make(config.problem);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!config.custom) return problem;

  const CustomProblem& custom = *config.custom;
  if (!custom.lower.empty() || !custom.upper.empty()) {
    if (custom.lower.size() != custom.upper.size())
      throw ConfigError("problem.lower and problem.upper must have the same length");
    if (custom.lower.size() != problem.space.lower.size())
      throw ConfigError("problem bounds must have " +
                        std::to_string(problem.space.lower.size()) + " entries");
    for (std::size_t l = 0; l < custom.lower.size(); ++l) {
      if (!(custom.lower[l] < custom.upper[l]))
        throw ConfigError("problem.lower must be strictly below problem.upper");
    }
    problem.space.lower = custom.lower;
    problem.space.upper = custom.upper;
  }
  if (custom.y) problem.y = *custom.y;
  if (custom.noise_var) {
    if (!(*custom.noise_var > 0.0)) throw ConfigError("problem.sigma2 must be positive");
    problem.noise_var = *custom.noise_var;
  }
  return problem;
}

EngineConfig make_engine_config(const DesignConfig& config, int replicate) {
  if (config.n < 1) throw ConfigError("n must be positive");
  if (config.n0 < 2) throw ConfigError("n0 must be at least 2");
  if (config.b < 1 || config.w < config.b) throw ConfigError("need 1 <= b <= w");
  if (config.w > config.n) throw ConfigError("w must not exceed n");
  if (config.replicates < 1) throw ConfigError("replicates must be positive");
  if (config.spec.candidate_count < 1) throw ConfigError("candidates must be positive");
  if (config.spec.reference_count < 1) throw ConfigError("ref_size must be positive");
  if (config.mad_grid < 2) throw ConfigError("mad_grid must be at least 2");

  EngineConfig engine;
  engine.n0 = static_cast<std::size_t>(config.n0);
  engine.n = static_cast<std::size_t>(config.n);
  engine.b = static_cast<std::size_t>(config.b);
  engine.w = static_cast<std::size_t>(config.w);
  engine.spec = config.spec;
  engine.seeds.init = derive_seed(config.seed, 0x1dull);
  engine.seeds.candidates = derive_seed(config.seed, 0x2dull);
  engine.seeds.rng = derive_seed(config.seed, 0x3dull);
  engine.replicate_id = replicate;
  engine.clock = config.clock;
  engine.compute_mad = config.mad;
  engine.mad_grid = static_cast<std::size_t>(config.mad_grid);
  return engine;
}

PerfScenario make_scenario(const PerfConfig& config, int b, int w) {
  if (b < 1) throw ConfigError("b must be positive");
  if (w < b) throw ConfigError("w must be at least b");
  if (config.replicates < 1) throw ConfigError("replicates must be positive");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw ConfigError("alpha must lie strictly between 0 and 1");

  PerfScenario scenario;
  scenario.b = static_cast<std::size_t>(b);
  scenario.w = static_cast<std::size_t>(w);
  scenario.acq_label = config.acq_label;
  scenario.replicates = static_cast<std::size_t>(config.replicates);
  scenario.acq_model = config.acq;
  scenario.run_model = config.run;
  // Cells share one run-time stream: job j costs the same in every (b, w)
  // cell of a sweep, so makespan comparisons see common random numbers.
  scenario.run_model.seed = derive_seed(config.seed, config.run.seed);

  ProgressCurve curve;
  curve.kind = CurveKind::PiecewiseBatch;
  curve.batch = static_cast<std::size_t>(b);
  curve.total = config.curve.total;
  curve.exponent = config.curve.exponent;
  if (const auto it = config.curve.exponent_by_batch.find(b);
      it != config.curve.exponent_by_batch.end()) {
    curve.exponent = it->second;
  }
  if (config.curve.kind == CurveKind::Empirical) {
    if (config.curve.table.empty()) throw ConfigError("empirical curve needs a table");
    curve.table = config.curve.table;
  }
  scenario.curve = curve;

  try {
    scenario.stop_count = evals_to_accuracy(curve, config.alpha);
  } catch (const InfeasibleTarget& e) {
    throw ConfigError("b=" + std::to_string(b) + ": " + e.what());
  }
  if (scenario.stop_count < scenario.w)
    throw ConfigError("b=" + std::to_string(b) + " w=" + std::to_string(w) +
                      ": accuracy target is met within the initial wave");
  return scenario;
}

std::vector<std::pair<int, double>> read_measured_acq(const std::filesystem::path& stages_csv) {
  CsvTable table;
  try {
    table = read_csv(stages_csv);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  std::size_t stage_col = 0, time_col = 0, rep_col = 0;
  try {
    stage_col = table.column("stage");
    time_col = table.column("acq_time");
    rep_col = table.column("replicate_id");
  } catch (const std::out_of_range& e) {
    throw ConfigError(stages_csv.string() + ": " + e.what());
  }
  std::vector<std::pair<int, double>> out;
  std::string first_rep;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max({stage_col, time_col, rep_col})) continue;
    if (first_rep.empty()) first_rep = row[rep_col];
    if (row[rep_col] != first_rep) continue;
    try {
      out.emplace_back(std::stoi(row[stage_col]), std::stod(row[time_col]));
    } catch (const std::exception&) {
      throw ConfigError(stages_csv.string() + ": malformed stage row");
    }
  }
  if (out.empty()) throw ConfigError(stages_csv.string() + ": no stage rows");
  std::sort(out.begin(), out.end());
  return out;
}

std::string iso_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& file) {
  json doc;
  doc["tool"] = "seqcal";
  doc["command"] = manifest.command;
  doc["config"] = manifest.config;
  doc["artifacts"] = manifest.artifacts;
  doc["status"] = manifest.status;
  doc["started"] = manifest.started;
  doc["finished"] = manifest.finished;
  if (!manifest.error.empty()) doc["error"] = manifest.error;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(2) << "\n";
}

}  // namespace seqcal
