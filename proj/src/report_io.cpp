#include "netreg/report_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "netreg/error.hpp"
#include "netreg/io.hpp"

namespace netreg {
namespace {

using nlohmann::json;

const std::vector<std::string> kReplicateColumns = {"K", "n", "N", "n_star", "lambda"};

std::vector<std::string> replicate_header(ExperimentKind kind) {
  std::vector<std::string> h = {"K", "replicate", "seed", "n", "N", "n_star", "lambda", "sq_gap", "valid"};
  if (kind == ExperimentKind::power)
    h.insert(h.end(), {"f_true", "f_hat", "reject_true", "reject_hat"});
  return h;
}

std::vector<std::string> summary_header(ExperimentKind kind) {
  std::vector<std::string> h = {"K",     "n",      "N",          "n_star",       "lambda",
                                "valid", "failed", "mean_sq_gap", "median_sq_gap"};
  if (kind == ExperimentKind::power)
    h.insert(h.end(), {"pi_true", "pi_hat", "abs_diff", "se_true", "se_hat"});
  return h;
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ExperimentKind kind_from_header(const std::vector<std::string>& header,
                                const std::vector<std::string>& consistency,
                                const std::vector<std::string>& power,
                                const std::filesystem::path& path) {
  if (header == consistency) return ExperimentKind::consistency;
  if (header == power) return ExperimentKind::power;
  throw ParseError(path.string() + ": unrecognised header");
}

template <typename Int>
Int cell_int(const std::string& text, const std::filesystem::path& path) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(path.string() + ": '" + text + "' is not an integer");
  return v;
}

bool cell_bool(const std::string& text, const std::filesystem::path& path) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw ParseError(path.string() + ": '" + text + "' is not 0 or 1");
}

// JSON config helpers.

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ArgumentError(where + ": " + what);
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema_error(where, "expected an integer");
  return v.get<int>();
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) schema_error(where, "expected a boolean");
  return v.get<bool>();
}

void reject_unknown(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : object.items())
    if (!allowed.contains(key)) schema_error(where + "." + key, "unknown field");
}

std::vector<ScheduleEntry> parse_schedule(const json& v, ExperimentKind kind) {
  std::vector<ScheduleEntry> out;
  if (v.is_object()) {
    reject_unknown(v, {"preset", "K"}, "$.schedule");
    if (!v.contains("preset") || !v["preset"].is_string())
      schema_error("$.schedule.preset", "expected \"paper\" or \"desk\"");
    const std::string preset = v["preset"].get<std::string>();
    if (!v.contains("K") || !v["K"].is_array() || v["K"].empty())
      schema_error("$.schedule.K", "expected a non-empty array of integers");
    for (std::size_t i = 0; i < v["K"].size(); ++i) {
      const std::string where = "$.schedule.K[" + std::to_string(i) + "]";
      const int K = get_int(v["K"][i], where);
      if (K < 1) schema_error(where, "K must be >= 1");
      if (preset == "paper")
        out.push_back(kind == ExperimentKind::power ? paper_power_entry(K) : paper_consistency_entry(K));
      else if (preset == "desk" && kind == ExperimentKind::consistency)
        out.push_back(desk_consistency_entry(K));
      else
        schema_error("$.schedule.preset", "unknown preset '" + preset + "' for this experiment");
    }
    return out;
  }
  if (!v.is_array() || v.empty()) schema_error("$.schedule", "expected a preset object or a non-empty array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string where = "$.schedule[" + std::to_string(i) + "]";
    const json& e = v[i];
    if (!e.is_object()) schema_error(where, "expected an object");
    reject_unknown(e, {"K", "n", "N", "n_star", "lambda"}, where);
    for (const auto& key : kReplicateColumns)
      if (!e.contains(key)) schema_error(where + "." + key, "missing required field");
    ScheduleEntry s;
    s.K = get_int(e["K"], where + ".K");
    s.n = get_int(e["n"], where + ".n");
    s.N = get_int(e["N"], where + ".N");
    s.n_star = get_int(e["n_star"], where + ".n_star");
    s.lambda = get_number(e["lambda"], where + ".lambda");
    out.push_back(s);
  }
  return out;
}

}  // namespace

void write_replicate_csv(const std::filesystem::path& path, ExperimentKind kind,
                         std::span<const ReplicateRecord> records) {
  std::ofstream out = open_output(path);
  write_header(out, replicate_header(kind));
  for (const auto& r : records) {
    out << r.K << ',' << r.replicate << ',' << r.seed << ',' << r.n << ',' << r.N << ','
        << r.n_star << ',' << format_double(r.lambda) << ',' << format_double(r.sq_gap) << ','
        << (r.valid ? 1 : 0);
    if (kind == ExperimentKind::power)
      out << ',' << format_double(r.f_true) << ',' << format_double(r.f_hat) << ','
          << (r.reject_true ? 1 : 0) << ',' << (r.reject_hat ? 1 : 0);
    out << '\n';
  }
  close_output(out, path);
}

std::vector<ReplicateRecord> read_replicate_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const ExperimentKind kind =
      kind_from_header(table.header, replicate_header(ExperimentKind::consistency),
                       replicate_header(ExperimentKind::power), path);
  std::vector<ReplicateRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ReplicateRecord r;
    r.K = cell_int<int>(row[0], path);
    r.replicate = cell_int<int>(row[1], path);
    r.seed = cell_int<std::uint64_t>(row[2], path);
    r.n = cell_int<int>(row[3], path);
    r.N = cell_int<int>(row[4], path);
    r.n_star = cell_int<int>(row[5], path);
    r.lambda = parse_double(row[6]);
    r.sq_gap = parse_double(row[7]);
    r.valid = cell_bool(row[8], path);
    if (kind == ExperimentKind::power) {
      r.f_true = parse_double(row[9]);
      r.f_hat = parse_double(row[10]);
      r.reject_true = cell_bool(row[11], path);
      r.reject_hat = cell_bool(row[12], path);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path, ExperimentKind kind,
                       std::span<const KSummary> summaries) {
  std::ofstream out = open_output(path);
  write_header(out, summary_header(kind));
  for (const auto& s : summaries) {
    out << s.K << ',' << s.n << ',' << s.N << ',' << s.n_star << ',' << format_double(s.lambda)
        << ',' << s.valid << ',' << s.failed << ',' << format_double(s.mean_sq_gap) << ','
        << format_double(s.median_sq_gap);
    if (kind == ExperimentKind::power)
      out << ',' << format_double(s.pi_true) << ',' << format_double(s.pi_hat) << ','
          << format_double(s.abs_diff) << ',' << format_double(s.se_true) << ','
          << format_double(s.se_hat);
    out << '\n';
  }
  close_output(out, path);
}

std::vector<KSummary> read_summary_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const ExperimentKind kind =
      kind_from_header(table.header, summary_header(ExperimentKind::consistency),
                       summary_header(ExperimentKind::power), path);
  std::vector<KSummary> out;
  for (const auto& row : table.rows) {
    KSummary s;
    s.K = cell_int<int>(row[0], path);
    s.n = cell_int<int>(row[1], path);
    s.N = cell_int<int>(row[2], path);
    s.n_star = cell_int<int>(row[3], path);
    s.lambda = parse_double(row[4]);
    s.valid = cell_int<int>(row[5], path);
    s.failed = cell_int<int>(row[6], path);
    s.mean_sq_gap = parse_double(row[7]);
    s.median_sq_gap = parse_double(row[8]);
    if (kind == ExperimentKind::power) {
      s.pi_true = parse_double(row[9]);
      s.pi_hat = parse_double(row[10]);
      s.abs_diff = parse_double(row[11]);
      s.se_true = parse_double(row[12]);
      s.se_hat = parse_double(row[13]);
    }
    out.push_back(s);
  }
  return out;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("experiment config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");
  reject_unknown(doc,
                 {"format_version", "experiment", "schedule", "replicates", "seed", "s", "alpha",
                  "beta", "sigma", "variant", "t_range", "d", "l", "r", "level", "noiseless",
                  "threads", "smacof"},
                 "$");
  if (!doc.contains("format_version")) schema_error("$.format_version", "missing required field");
  if (get_int(doc["format_version"], "$.format_version") != 1)
    schema_error("$.format_version", "unsupported version (expected 1)");
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    schema_error("$.experiment", "expected \"consistency\" or \"power\"");

  ExperimentConfig c;
  try {
    c.kind = parse_experiment_kind(doc["experiment"].get<std::string>());
  } catch (const ArgumentError& e) {
    schema_error("$.experiment", e.what());
  }
  const bool power = c.kind == ExperimentKind::power;
  c.sigma = power ? 0.1 : 0.01;
  c.variant = power ? CurveVariant::curve_b : CurveVariant::curve_a;
  c.l = power ? 5 : 6;
  c.r = power ? 0 : 6;

  if (!doc.contains("schedule")) schema_error("$.schedule", "missing required field");
  c.schedule = parse_schedule(doc["schedule"], c.kind);
  if (!doc.contains("replicates")) schema_error("$.replicates", "missing required field");
  c.replicates = get_int(doc["replicates"], "$.replicates");
  if (!doc.contains("seed")) schema_error("$.seed", "missing required field");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0))
    schema_error("$.seed", "expected a non-negative integer");
  c.base_seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("s")) c.labeled = get_int(doc["s"], "$.s");
  if (doc.contains("alpha")) c.alpha = get_number(doc["alpha"], "$.alpha");
  if (doc.contains("beta")) c.beta = get_number(doc["beta"], "$.beta");
  if (doc.contains("sigma")) c.sigma = get_number(doc["sigma"], "$.sigma");
  if (doc.contains("variant")) {
    if (!doc["variant"].is_string()) schema_error("$.variant", "expected a string");
    try {
      c.variant = parse_curve_variant(doc["variant"].get<std::string>());
    } catch (const ArgumentError& e) {
      schema_error("$.variant", e.what());
    }
  }
  if (doc.contains("t_range")) {
    const json& t = doc["t_range"];
    if (!t.is_array() || t.size() != 2) schema_error("$.t_range", "expected [min, max]");
    c.t_min = get_number(t[0], "$.t_range[0]");
    c.t_max = get_number(t[1], "$.t_range[1]");
  }
  if (doc.contains("d")) c.d = get_int(doc["d"], "$.d");
  if (doc.contains("l")) c.l = get_int(doc["l"], "$.l");
  if (doc.contains("r")) c.r = get_int(doc["r"], "$.r");
  if (doc.contains("level")) c.level = get_number(doc["level"], "$.level");
  if (doc.contains("noiseless")) c.noiseless = get_bool(doc["noiseless"], "$.noiseless");
  if (doc.contains("threads")) c.threads = get_int(doc["threads"], "$.threads");
  if (doc.contains("smacof")) {
    const json& sm = doc["smacof"];
    if (!sm.is_object()) schema_error("$.smacof", "expected an object");
    reject_unknown(sm, {"tolerance", "max_iterations"}, "$.smacof");
    if (sm.contains("tolerance")) c.smacof.tolerance = get_number(sm["tolerance"], "$.smacof.tolerance");
    if (sm.contains("max_iterations"))
      c.smacof.max_iterations = get_int(sm["max_iterations"], "$.smacof.max_iterations");
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open experiment config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["format_version"] = 1;
  doc["experiment"] = std::string(to_string(c.kind));
  doc["schedule"] = json::array();
  for (const auto& e : c.schedule)
    doc["schedule"].push_back({{"K", e.K}, {"n", e.n}, {"N", e.N}, {"n_star", e.n_star}, {"lambda", e.lambda}});
  doc["replicates"] = c.replicates;
  doc["seed"] = c.base_seed;
  doc["s"] = c.labeled;
  doc["alpha"] = c.alpha;
  doc["beta"] = c.beta;
  doc["sigma"] = c.sigma;
  doc["variant"] = std::string(to_string(c.variant));
  doc["t_range"] = {c.t_min, c.t_max};
  doc["d"] = c.d;
  doc["l"] = c.l;
  doc["r"] = c.r;
  doc["level"] = c.level;
  doc["noiseless"] = c.noiseless;
  doc["threads"] = c.threads;
  doc["smacof"] = {{"tolerance", c.smacof.tolerance}, {"max_iterations", c.smacof.max_iterations}};
  return doc.dump(2) + "\n";
}

}  // namespace netreg
