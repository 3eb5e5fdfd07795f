#include "parabest/cli.hpp"

#include "parabest/checks.hpp"
#include "parabest/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace parabest {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v))
    throw InvalidArgument(key + ": expected a number, got '" + value + "'");
  return v;
}

int to_int(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw InvalidArgument(key + ": expected an integer, got '" + value + "'");
  return v;
}

// "k,j=v"
void apply_constant(ConstantsTable &c, const std::string &text) {
  const auto comma = text.find(',');
  const auto eq = text.find('=');
  if (comma == std::string::npos || eq == std::string::npos || eq < comma)
    throw InvalidArgument("const: expected k,j=value, got '" + text + "'");
  const int k = to_int("const", trim(text.substr(0, comma)));
  const int j = to_int("const", trim(text.substr(comma + 1, eq - comma - 1)));
  const double v = to_double("const", trim(text.substr(eq + 1)));
  if (k < 1 || j < 0 || !(v > 0.0))
    throw InvalidArgument("const: need k >= 1, j >= 0 and a positive value in '" + text + "'");
  c.set(k, j, v);
}

const std::vector<std::string> &setting_keys() {
  static const std::vector<std::string> keys{"problem", "degree",      "k",        "h0",    "tau0",
                                             "runs",    "alpha",       "const",    "out",   "jobs",
                                             "quad-error", "time-points", "schedule"};
  return keys;
}

std::string setting_help(const std::string &key) {
  static const std::map<std::string, std::string> help{
      {"problem", "slow | fast"},
      {"degree", "polynomial degree, 1 or 2"},
      {"k", "coupling exponent, tau ~ h^k (1-4)"},
      {"h0", "meshsize of run 1; 2/h0 must be an integer"},
      {"tau0", "time step of run 1, in (0, 1]"},
      {"runs", "number of runs, each halving h (1-10)"},
      {"alpha", "override of the ellipticity constant"},
      {"out", "output directory"},
      {"jobs", "runs computed in parallel"},
      {"quad-error", "quadrature exactness for data and errors (2-20)"},
      {"time-points", "Gauss points in time for the data estimators (1-10)"},
      {"schedule", "mesh-change schedule file"},
  };
  const auto it = help.find(key);
  return it == help.end() ? std::string() : it->second;
}

} // namespace

void apply_setting(CliConfig &config, const std::string &key, const std::string &value) {
  RunPreset &p = config.run.preset;
  if (key == "problem") {
    p.problem = parse_problem(value);
  } else if (key == "degree") {
    const int d = to_int(key, value);
    if (d != 1 && d != 2)
      throw InvalidArgument("degree must be 1 or 2, got " + value);
    p.degree = d;
  } else if (key == "k") {
    const int k = to_int(key, value);
    if (k < 1 || k > 4)
      throw InvalidArgument("k must be between 1 and 4, got " + value);
    p.k = k;
  } else if (key == "h0") {
    const double h = to_double(key, value);
    const double cells = 2.0 / h;
    if (!(h > 0.0) || std::abs(cells - std::round(cells)) > 1e-9 * cells)
      throw InvalidArgument("h0 must be 2/s for a positive integer s, got " + value);
    p.h1 = h;
  } else if (key == "tau0") {
    const double t = to_double(key, value);
    if (!(t > 0.0) || t > 1.0)
      throw InvalidArgument("tau0 must lie in (0, 1], got " + value);
    p.tau1 = t;
  } else if (key == "runs") {
    const int r = to_int(key, value);
    if (r < 1 || r > 10)
      throw InvalidArgument("runs must be between 1 and 10, got " + value);
    p.runs = r;
  } else if (key == "alpha") {
    const double a = to_double(key, value);
    if (!(a > 0.0))
      throw InvalidArgument("alpha must be positive");
    config.run.constants.alpha = a;
  } else if (key == "const") {
    apply_constant(config.run.constants, value);
  } else if (key == "out") {
    if (value.empty())
      throw InvalidArgument("out: empty path");
    config.out_dir = value;
    config.out_source = "flag";
  } else if (key == "jobs") {
    const int j = to_int(key, value);
    if (j < 1)
      throw InvalidArgument("jobs must be >= 1");
    config.jobs = j;
  } else if (key == "quad-error") {
    const int q = to_int(key, value);
    if (q < 2 || q > 20)
      throw InvalidArgument("quad-error (quadrature exactness) must be between 2 and 20");
    config.run.exactness = q;
  } else if (key == "time-points") {
    const int q = to_int(key, value);
    if (q < 1 || q > 10)
      throw InvalidArgument("time-points must be between 1 and 10");
    config.run.time_points = q;
  } else if (key == "schedule") {
    std::ifstream in(value);
    if (!in)
      throw InvalidArgument("schedule: cannot open '" + value + "'");
    try {
      config.run.schedule = parse_schedule(in);
    } catch (const ParseError &e) {
      throw InvalidArgument(e.what());
    }
    config.schedule_file = value;
  } else {
    throw InvalidArgument("unknown setting '" + key + "'");
  }
}

void apply_config_file(CliConfig &config, std::istream &is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    try {
      apply_setting(config, key, trim(line.substr(eq + 1)));
    } catch (const InvalidArgument &e) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

ParseOutcome parse_args(int argc, const char *const *argv) {
  CLI::App app{"Backward Euler heat-equation solver with a posteriori error estimators and convergence studies",
               "parabest"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 failed check, 2 usage error, 3 output/I-O error, 4 runtime error.\n"
             "PARABEST_OUT sets the output directory unless --out is given.");

  std::map<std::string, std::string> values;
  std::vector<std::string> constants;
  bool force = false;
  std::string preset_name;

  const auto add_run_options = [&](CLI::App *sub) {
    for (const auto &key : setting_keys()) {
      if (key == "const")
        continue;
      sub->add_option_function<std::string>(
          "--" + key, [&values, key](const std::string &v) { values[key] = v; }, setting_help(key));
    }
    sub->add_option("--const", constants, "constant override k,j=value (repeatable)");
    sub->add_flag("--force", force, "write into a non-empty output directory");
    sub->add_option_function<std::string>(
        "--config", [&values](const std::string &v) { values["config"] = v; }, "key=value settings file");
  };

  CLI::App *run = app.add_subcommand("run", "custom convergence study");
  add_run_options(run);
  CLI::App *pre = app.add_subcommand("preset", "one of the tabulated studies: 1, 2, 3a, 3b, 4");
  pre->add_option("name", preset_name, "preset name")->required();
  add_run_options(pre);
  CLI::App *check = app.add_subcommand("check", "run the property suites");

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    outcome.exit_code = code == 0 ? kExitOk : kExitUsage;
    outcome.message = out.str() + err.str();
    return outcome;
  }

  CliConfig config;
  try {
    if (check->parsed()) {
      config.command = Command::check;
      outcome.config = config;
      return outcome;
    }
    if (pre->parsed()) {
      config.command = Command::preset;
      config.run.preset = preset(preset_name);
    } else {
      config.command = Command::run;
      config.run.preset = preset("1");
      config.run.preset.name = "custom";
    }
    if (const auto it = values.find("config"); it != values.end()) {
      std::ifstream in(it->second);
      if (!in)
        throw InvalidArgument("cannot open config file '" + it->second + "'");
      config.config_file = it->second;
      apply_config_file(config, in);
    }
    for (const auto &key : setting_keys())
      if (const auto it = values.find(key); it != values.end())
        apply_setting(config, key, it->second);
    for (const auto &c : constants)
      apply_setting(config, "const", c);
    config.force = force;
    if (config.out_dir.empty()) {
      if (const char *env = std::getenv("PARABEST_OUT"); env && *env) {
        config.out_dir = env;
        config.out_source = "env";
      } else {
        config.out_dir = std::filesystem::path("parabest-out") / ("preset-" + config.run.preset.name);
        config.out_source = "default";
      }
    }
  } catch (const std::invalid_argument &e) {
    outcome.exit_code = kExitUsage;
    outcome.message = std::string("error: ") + e.what() + "\nRun with --help for usage.\n";
    return outcome;
  }
  outcome.config = config;
  return outcome;
}

namespace {

nlohmann::json config_json(const CliConfig &c) {
  const RunPreset &p = c.run.preset;
  nlohmann::json consts = nlohmann::json::array();
  for (const auto &[kj, v] : c.run.constants.overrides())
    consts.push_back({{"k", kj.first}, {"j", kj.second}, {"value", v}});
  nlohmann::json schedule = nlohmann::json::array();
  for (const auto &m : c.run.schedule) {
    if (m.reset)
      schedule.push_back({{"step", m.step}, {"action", "base"}});
    else
      schedule.push_back({{"step", m.step},
                          {"action", "refine"},
                          {"box", {m.lo.x, m.lo.y, m.hi.x, m.hi.y}},
                          {"times", m.times}});
  }
  const double alpha = c.run.constants.alpha.value_or(make_benchmark(p.problem).a.alpha());
  return {
      {"command", c.command == Command::run ? "run" : "preset"},
      {"preset", p.name},
      {"problem", to_string(p.problem)},
      {"degree", p.degree},
      {"k", p.k},
      {"h0", p.h1},
      {"tau0", p.tau1},
      {"runs", p.runs},
      {"alpha", alpha},
      {"alpha_overridden", c.run.constants.alpha.has_value()},
      {"constant_overrides", consts},
      {"constant_default", 1.0},
      {"quad_error", c.run.exactness},
      {"time_points", c.run.time_points},
      {"verify", c.run.verify},
      {"fast_paths", c.run.fast_paths},
      {"jobs", c.jobs},
      {"force", c.force},
      {"out", c.out_dir.string()},
      {"out_source", c.out_source},
      {"config_file", c.config_file},
      {"schedule_file", c.schedule_file},
      {"schedule", schedule},
  };
}

bool write_file(const std::filesystem::path &path, const std::string &content, std::ostream &err) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  os.close();
  if (!os) {
    err << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

int execute_check(std::ostream &out) {
  bool all = true;
  for (const auto &r : run_all_checks()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": measured " << r.measured << ", threshold " << r.threshold
        << " (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all ? kExitOk : kExitCheckFailed;
}

} // namespace

int execute(const CliConfig &config, std::ostream &out, std::ostream &err) {
  if (config.command == Command::check) {
    try {
      return execute_check(out);
    } catch (const std::exception &e) {
      err << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }

  namespace fs = std::filesystem;
  const fs::path dir = config.out_dir;
  try {
    if (fs::exists(dir)) {
      if (!fs::is_directory(dir)) {
        err << "error: output path " << dir.string() << " is not a directory\n";
        return kExitIo;
      }
      if (!fs::is_empty(dir) && !config.force) {
        err << "error: output directory " << dir.string() << " is not empty; pass --force to overwrite\n";
        return kExitIo;
      }
    }
    fs::create_directories(dir);
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  const RunPreset &p = config.run.preset;
  out << "parabest " << kVersion << ": " << (config.command == Command::run ? "run" : "preset") << ' ' << p.name
      << " (" << to_string(p.problem) << ", P" << p.degree << ", k=" << p.k << ", h0=" << p.h1
      << ", tau0=" << p.tau1 << ", runs=" << p.runs << ")\n";
  out.flush();

  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  try {
    report = run_preset(config.run, config.jobs);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string base = "preset-" + p.name;
  const std::string rows_name = base + "-rows.csv", summary_name = base + "-summary.csv";
  const std::string plot_name = "plot-" + p.name + ".py";
  std::ostringstream rows, summary;
  write_rows_csv(rows, report);
  write_summary_csv(summary, report);

  nlohmann::json runs = nlohmann::json::array();
  for (const auto &r : report.runs)
    runs.push_back({{"i", r.run},
                    {"h", r.h},
                    {"tau", r.tau},
                    {"steps", r.steps},
                    {"elements", r.elements},
                    {"dofs", r.dofs},
                    {"seconds", r.seconds},
                    {"max_pointwise_defect", r.max_pointwise_defect},
                    {"max_elliptic_agreement", r.max_elliptic_agreement}});
  nlohmann::json eocs = nlohmann::json::object();
  for (const auto &[name, s] : report.eocs) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : s)
      arr.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json());
    eocs[name] = arr;
  }
  const nlohmann::json manifest{
      {"tool", "parabest"},
      {"config", config_json(config)},
      {"versions",
       {{"parabest", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"cli11", CLI11_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__},
        {"cxx_standard", __cplusplus}}},
      {"timings", {{"total_seconds", total}, {"runs", runs}}},
      {"eoc", eocs},
      {"files", {rows_name, summary_name, plot_name}},
  };

  if (!write_file(dir / rows_name, rows.str(), err) || !write_file(dir / summary_name, summary.str(), err) ||
      !write_file(dir / plot_name, plot_script(report, rows_name, summary_name), err) ||
      !write_file(dir / "manifest.json", manifest.dump(2) + "\n", err))
    return kExitIo;

  char buf[160];
  for (const auto &r : report.runs) {
    std::snprintf(buf, sizeof buf, "run %d: h=%.6g tau=%.6g steps=%d elements=%d dofs=%d %.1fs\n", r.run, r.h, r.tau,
                  r.steps, r.elements, r.dofs, r.seconds);
    out << buf;
  }
  if (report.runs.size() > 1) {
    out << "EOC of final values:\n";
    for (const auto &[name, s] : report.eocs) {
      std::snprintf(buf, sizeof buf, "  %-20s", name.c_str());
      out << buf;
      for (double v : s) {
        std::snprintf(buf, sizeof buf, " %7.3f", v);
        out << buf;
      }
      out << "\n";
    }
  }
  out << "wrote " << (dir / rows_name).string() << ", " << summary_name << ", " << plot_name << ", manifest.json\n";
  return kExitOk;
}

int cli_main(int argc, const char *const *argv) {
  const ParseOutcome parsed = parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == kExitOk ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  return execute(*parsed.config, std::cout, std::cerr);
}

} // namespace parabest
