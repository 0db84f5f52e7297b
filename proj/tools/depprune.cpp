#include "depprune/commands.hpp"
#include "depprune/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using depprune::DebloatStrategy;
using depprune::OutputFormat;
using depprune::RestoreMode;
using depprune::RunConfig;

std::set<std::string> parse_extensions(const std::string& list) {
  std::set<std::string> out;
  std::string current;
  for (char c : list + ",") {
    if (c == ',') {
      if (!current.empty()) {
        if (current.front() != '.') current.insert(current.begin(), '.');
        out.insert(current);
        current.clear();
      }
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  return out;
}

struct CliOptions {
  RunConfig cfg;
  std::string strategy = "full";
  std::string format = "text";
  std::string ext_list;
  std::string restore = "targeted";
  std::string env_allow;
  std::string install;
  std::string trace_file;
  std::string trace_out;
  std::string list_file;
};

void add_common(CLI::App* cmd, CliOptions& opts, bool with_package_dir = true) {
  if (with_package_dir) {
    cmd->add_option("package_dir", opts.cfg.package_dir,
                    "package directory (contains package.json and "
                    "package-lock.json)")
        ->required();
  }
  cmd->add_option("--ext", opts.ext_list,
                  "comma-separated module extensions counted as access "
                  "(default: js,json)")
      ->envname("DEPPRUNE_EXT");
  cmd->add_option("--timeout", opts.cfg.timeout_s,
                  "wall-clock limit per spawned run, seconds (default 1800)")
      ->envname("DEPPRUNE_TIMEOUT");
  cmd->add_option("--format", opts.format, "output format: text|json")
      ->envname("DEPPRUNE_FORMAT")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--tracer", opts.cfg.tracer,
                  "tracer binary (default strace)")
      ->envname("DEPPRUNE_TRACER");
  cmd->add_flag("--stat-calls", opts.cfg.stat_family,
                "also count stat-family syscalls as accesses");
}

void add_strategy(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--strategy", opts.strategy,
                  "removal strategy: direct|full (default full)")
      ->envname("DEPPRUNE_STRATEGY")
      ->check(CLI::IsMember({"direct", "full"}));
  cmd->add_flag("--allow-shadow-fallback", opts.cfg.allow_shadow_fallback,
                "permit removals whose references re-resolve to an ancestor "
                "copy of the same dependency");
  cmd->add_flag("--in-place", opts.cfg.in_place,
                "overwrite package.json / package-lock.json after saving "
                ".orig backups (default: write .debloated siblings)");
}

void add_workload_helpers(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--install", opts.install,
                  "clean-install command (default: \"npm ci\")")
      ->envname("DEPPRUNE_INSTALL");
  cmd->add_option("--env-allow", opts.env_allow,
                  "comma-separated allowlist of environment variables passed "
                  "to spawned commands (default: pass everything)");
  cmd->add_option("--restore", opts.restore,
                  "repair mode when validation fails: targeted|single|bisect")
      ->check(CLI::IsMember({"targeted", "single", "bisect"}));
  cmd->add_flag("--keep-scratch", opts.cfg.keep_scratch,
                "keep the scratch copy used for validation runs");
}

std::vector<std::string> split_commas(const std::string& list) {
  std::vector<std::string> out;
  std::string current;
  for (char c : list + ",") {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> split_spaces(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text + " ") {
    if (c == ' ') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  return out;
}

// Config file in the package directory, lowest precedence after flags and
// environment variables.
void apply_config_file(CLI::App* cmd, CliOptions& opts) {
  if (opts.cfg.package_dir.empty()) return;
  const auto path = opts.cfg.package_dir / "depprune.json";
  std::ifstream in(path);
  if (!in) return;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  depprune::ojson doc;
  try {
    doc = depprune::parse_document(buffer.str(), "depprune.json");
  } catch (const depprune::Error& e) {
    throw depprune::UsageError(std::string("config file: ") + e.what());
  }
  auto unset = [&](const std::string& flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  if (doc.contains("strategy") && unset("--strategy")) {
    opts.strategy = doc.at("strategy").get<std::string>();
  }
  if (doc.contains("format") && unset("--format")) {
    opts.format = doc.at("format").get<std::string>();
  }
  if (doc.contains("timeout") && unset("--timeout")) {
    opts.cfg.timeout_s = doc.at("timeout").get<int>();
  }
  if (doc.contains("ext") && unset("--ext")) {
    opts.ext_list = doc.at("ext").get<std::string>();
  }
  if (doc.contains("jobs") && unset("--jobs")) {
    opts.cfg.jobs = doc.at("jobs").get<int>();
  }
  if (doc.contains("tracer") && unset("--tracer")) {
    opts.cfg.tracer = doc.at("tracer").get<std::string>();
  }
  if (doc.contains("install") && unset("--install")) {
    opts.install = doc.at("install").get<std::string>();
  }
  if (doc.contains("allow_shadow_fallback") &&
      unset("--allow-shadow-fallback")) {
    opts.cfg.allow_shadow_fallback = doc.at("allow_shadow_fallback").get<bool>();
  }
}

void finalize(CLI::App* cmd, CliOptions& opts) {
  apply_config_file(cmd, opts);
  opts.cfg.strategy = opts.strategy == "direct" ? DebloatStrategy::direct_only
                                                : DebloatStrategy::full_scale;
  opts.cfg.format =
      opts.format == "json" ? OutputFormat::json : OutputFormat::text;
  if (!opts.ext_list.empty()) {
    opts.cfg.extensions = parse_extensions(opts.ext_list);
  }
  if (opts.restore == "single") {
    opts.cfg.restore_mode = RestoreMode::targeted_single;
  } else if (opts.restore == "bisect") {
    opts.cfg.restore_mode = RestoreMode::bisect_only;
  }
  if (!opts.env_allow.empty()) {
    opts.cfg.env_allowlist = split_commas(opts.env_allow);
  }
  if (!opts.install.empty()) {
    opts.cfg.install_cmd = split_spaces(opts.install);
  }
  if (!opts.trace_file.empty()) {
    opts.cfg.trace_input = std::filesystem::path(opts.trace_file);
  }
  if (!opts.trace_out.empty()) {
    opts.cfg.trace_out = std::filesystem::path(opts.trace_out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "depprune: find and remove npm dependencies a workload never touches, "
      "by tracing file-system access during execution"};
  app.require_subcommand(1);

  CliOptions opts;

  CLI::App* trace = app.add_subcommand(
      "trace", "run the workload under the tracer and write the raw log");
  add_common(trace, opts);
  trace->add_option("--trace-out", opts.trace_out,
                    "log destination (default: <package_dir>/depprune.trace.log)");
  trace->add_option("--env-allow", opts.env_allow,
                    "comma-separated allowlist of environment variables");
  std::vector<std::string> trace_workload;
  trace->add_option("workload", trace_workload, "workload argv (after --)");

  CLI::App* detect = app.add_subcommand(
      "detect", "classify runtime dependencies from a recorded trace");
  add_common(detect, opts);
  detect->add_option("--trace", opts.trace_file, "recorded tracer log");
  std::vector<std::string> detect_workload;
  detect->add_option("workload", detect_workload,
                     "workload argv to trace live (after --)");

  CLI::App* debloat = app.add_subcommand(
      "debloat", "write debloated manifest/lockfile for the detected bloat "
                 "(no validation)");
  add_common(debloat, opts);
  add_strategy(debloat, opts);
  debloat->add_option("--trace", opts.trace_file, "recorded tracer log");
  std::vector<std::string> debloat_workload;
  debloat->add_option("workload", debloat_workload,
                      "workload argv to trace live (after --)");

  CLI::App* validate = app.add_subcommand(
      "validate", "replay a recorded trace, then rebuild and re-execute the "
                  "workload until the removal set is confirmed safe");
  add_common(validate, opts);
  add_strategy(validate, opts);
  add_workload_helpers(validate, opts);
  validate->add_option("--trace", opts.trace_file, "recorded tracer log")
      ->required();
  std::vector<std::string> validate_workload;
  validate->add_option("workload", validate_workload,
                       "workload argv (after --)");

  CLI::App* run = app.add_subcommand(
      "run", "full pipeline: trace, detect, debloat, validate");
  add_common(run, opts);
  add_strategy(run, opts);
  add_workload_helpers(run, opts);
  run->add_option("--trace", opts.trace_file,
                  "replay a recorded tracer log instead of tracing live");
  run->add_option("--trace-out", opts.trace_out,
                  "log destination for live tracing");
  std::vector<std::string> run_workload;
  run->add_option("workload", run_workload, "workload argv (after --)");

  CLI::App* corpus = app.add_subcommand(
      "corpus", "detect bloat across a list of package directories and "
                "summarize");
  corpus->add_option("list_file", opts.list_file,
                     "file with one package directory per line")
      ->required();
  corpus->add_option("--trace", opts.trace_file,
                     "per-package trace log name (relative to each package; "
                     "default depprune.trace.log)");
  corpus->add_option("--strategy", opts.strategy, "direct|full")
      ->envname("DEPPRUNE_STRATEGY")
      ->check(CLI::IsMember({"direct", "full"}));
  corpus->add_option("--format", opts.format, "text|json")
      ->envname("DEPPRUNE_FORMAT")
      ->check(CLI::IsMember({"text", "json"}));
  corpus->add_option("--ext", opts.ext_list, "module extensions")
      ->envname("DEPPRUNE_EXT");
  corpus->add_option("--jobs", opts.cfg.jobs, "parallel analyses (default 1)")
      ->envname("DEPPRUNE_JOBS");
  corpus->add_flag("--stat-calls", opts.cfg.stat_family,
                   "also count stat-family syscalls");

  CLI11_PARSE(app, argc, argv);

  try {
    if (trace->parsed()) {
      opts.cfg.workload = trace_workload;
      finalize(trace, opts);
      return depprune::cmd_trace(opts.cfg, std::cout, std::cerr);
    }
    if (detect->parsed()) {
      opts.cfg.workload = detect_workload;
      finalize(detect, opts);
      if (opts.cfg.trace_input && !opts.cfg.workload.empty()) {
        throw depprune::UsageError(
            "pass either --trace FILE or a workload, not both");
      }
      return depprune::cmd_detect(opts.cfg, std::cout, std::cerr);
    }
    if (debloat->parsed()) {
      opts.cfg.workload = debloat_workload;
      finalize(debloat, opts);
      return depprune::cmd_debloat(opts.cfg, std::cout, std::cerr);
    }
    if (validate->parsed()) {
      opts.cfg.workload = validate_workload;
      finalize(validate, opts);
      return depprune::cmd_validate(opts.cfg, std::cout, std::cerr);
    }
    if (run->parsed()) {
      opts.cfg.workload = run_workload;
      finalize(run, opts);
      return depprune::cmd_run(opts.cfg, std::cout, std::cerr);
    }
    if (corpus->parsed()) {
      finalize(corpus, opts);
      return depprune::cmd_corpus(opts.cfg, opts.list_file, std::cout,
                                  std::cerr);
    }
  } catch (const depprune::Error& e) {
    return depprune::report_error(e, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return depprune::kExitInputError;
  }
  return depprune::kExitInputError;
}
