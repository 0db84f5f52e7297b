#include "depprune/commands.hpp"

#include "depprune/errors.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <thread>

namespace depprune {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw UsageError("cannot write " + path.string());
}

Lockfile load_lockfile(const fs::path& package_dir) {
  return Lockfile::parse(read_file(package_dir / "package-lock.json"));
}

Manifest load_manifest(const fs::path& package_dir) {
  return Manifest::parse(read_file(package_dir / "package.json"));
}

TraceOptions trace_options(const RunConfig& cfg) {
  return cfg.stat_family ? TraceOptions::with_stat_family() : TraceOptions{};
}

SystemEnvironmentOptions environment_options(const RunConfig& cfg) {
  SystemEnvironmentOptions opts;
  opts.install_argv = cfg.install_cmd;
  opts.tracer = cfg.tracer;
  opts.timeout_s = cfg.timeout_s;
  opts.env_allowlist = cfg.env_allowlist;
  opts.trace_log = fs::absolute(cfg.trace_out_path());
  return opts;
}

DetectionData detect_from_events(Lockfile lock,
                                 const std::vector<TraceEvent>& events,
                                 const TraceStats& stats,
                                 const fs::path& package_dir,
                                 const RunConfig& cfg) {
  FilterOptions filter;
  filter.extensions = cfg.extensions;
  std::error_code ec;
  fs::path root = fs::weakly_canonical(fs::absolute(package_dir), ec);
  if (ec) root = fs::absolute(package_dir);

  const AccessSet access =
      filter_module_accesses(events, root.string(), filter);
  const AccessedDeps deps = accessed_dependencies(access, lock);
  const std::set<std::string> runtime = lock.runtime_instances();

  std::set<std::string> accessed_runtime;
  DetectionData data{std::move(lock), {}, {}};
  for (const auto& path : deps.known) {
    if (runtime.count(path)) {
      accessed_runtime.insert(path);
    } else {
      data.diag.dev_accesses.insert(path);
    }
  }
  data.report = detect(data.lock, accessed_runtime);
  data.diag.module_files_accessed = access.module_paths.size();
  data.diag.untracked_accesses = deps.untracked;
  data.diag.unmapped_paths = access.unmapped_paths;
  data.diag.trace = stats;
  for (const auto& inst : data.lock.instances()) {
    if (inst.bundled) ++data.diag.bundled_instances;
  }
  return data;
}

DetectionData detect_live(const fs::path& package_dir, const RunConfig& cfg) {
  SystemEnvironment env(environment_options(cfg));
  try {
    env.rebuild(package_dir);
  } catch (const InstallFailed& e) {
    throw WorkloadBrokenIndependently(e.output());
  }
  const WorkloadResult traced =
      env.run_workload(package_dir, cfg.workload, true);
  if (!traced.ok()) {
    throw WorkloadBrokenIndependently(traced.output);
  }
  return detect_from_trace_file(package_dir, *traced.trace_log, cfg);
}

DetectionData detect_auto(const fs::path& package_dir, const RunConfig& cfg) {
  if (cfg.trace_input) {
    return detect_from_trace_file(package_dir, *cfg.trace_input, cfg);
  }
  if (cfg.workload.empty()) {
    throw UsageError("provide a recorded trace (--trace FILE) or a workload "
                     "(after --) to analyze");
  }
  return detect_live(package_dir, cfg);
}

void backup_and_write(const fs::path& target, const std::string& content,
                      bool in_place, std::ostream& out) {
  if (in_place) {
    std::error_code ec;
    fs::copy_file(target, fs::path(target.string() + ".orig"),
                  fs::copy_options::overwrite_existing, ec);
    write_file(target, content);
    out << "wrote " << target.string() << " (backup: " << target.string()
        << ".orig)\n";
  } else {
    const fs::path sibling = target.string() + ".debloated";
    write_file(sibling, content);
    out << "wrote " << sibling.string() << "\n";
  }
}

CorpusRow corpus_row(const fs::path& package_dir, const RunConfig& cfg) {
  CorpusRow row;
  row.name = package_dir.filename().string();
  try {
    RunConfig pkg_cfg = cfg;
    pkg_cfg.package_dir = package_dir;
    fs::path trace = cfg.trace_input ? *cfg.trace_input
                                     : fs::path("depprune.trace.log");
    if (trace.is_relative()) trace = package_dir / trace;
    const DetectionData data =
        detect_from_trace_file(package_dir, trace, pkg_cfg);
    row.total_runtime = data.report.total_runtime;
    row.direct_count = data.lock.root_runtime_deps().size();
    row.direct_bloated = data.report.direct_bloated.size();
    row.cascade = data.report.cascade_from_direct.size();
    row.original = data.report.total_runtime;
    row.removed = cfg.strategy == DebloatStrategy::direct_only
                      ? data.report.direct_only_removed()
                      : data.report.full_scale_removed();
    row.r_d = row.original == 0 ? 0.0 : compute_rd(row.removed, row.original);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

ojson final_result_json(const FinalResult& outcome, const BloatReport& report,
                        const DetectDiagnostics& diag,
                        const fs::path& manifest_path,
                        const fs::path& lockfile_path) {
  ojson doc;
  doc["schema_version"] = 1;
  ojson bloated = ojson::array();
  for (const auto& path : outcome.bloated) bloated.push_back(path);
  doc["confirmed_bloated"] = std::move(bloated);
  ojson restored = ojson::array();
  for (const auto& path : outcome.restored) restored.push_back(path);
  doc["restored"] = std::move(restored);
  doc["iterations"] = outcome.iterations;
  doc["artifacts"] = {{"manifest", manifest_path.string()},
                      {"lockfile", lockfile_path.string()}};
  doc["detection"] = report_to_json(report, diag);
  return doc;
}

}  // namespace

DetectionData detect_from_trace_file(const fs::path& package_dir,
                                     const fs::path& trace_file,
                                     const RunConfig& cfg) {
  Lockfile lock = load_lockfile(package_dir);
  TraceParser parser(trace_options(cfg));
  std::vector<TraceEvent> events;
  if (trace_file == "-") {
    events = read_trace_stream(std::cin, parser);
  } else {
    std::ifstream in(trace_file);
    if (!in) throw UsageError("cannot read trace log " + trace_file.string());
    events = read_trace_stream(in, parser);
  }
  return detect_from_events(std::move(lock), events, parser.stats(),
                            package_dir, cfg);
}

int cmd_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.workload.empty()) {
    throw UsageError("trace requires a workload after --");
  }
  if (!command_available(cfg.tracer)) throw TracerUnavailable(cfg.tracer);

  const fs::path log = fs::absolute(cfg.trace_out_path());
  ExecOptions exec;
  exec.cwd = cfg.package_dir;
  exec.timeout_s = cfg.timeout_s;
  exec.env_allowlist = cfg.env_allowlist;
  const ExecResult result =
      run_process(tracer_argv(cfg.tracer, log, cfg.workload), exec);
  err << result.output;
  out << log.string() << "\n";
  if (result.timed_out) {
    err << "workload timed out after " << cfg.timeout_s << "s\n";
  }
  return result.exit_code;  // mirror the workload
}

int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DetectionData data = detect_auto(cfg.package_dir, cfg);
  if (data.report.accessed.empty()) {
    err << "warning: no module accesses under node_modules were found in the "
           "trace; every runtime dependency will be reported bloated\n";
  }
  out << render_report(data.report, data.diag, cfg.format);
  return kExitOk;
}

int cmd_debloat(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DetectionData data = detect_auto(cfg.package_dir, cfg);
  const Manifest manifest = load_manifest(cfg.package_dir);
  const DebloatPlan plan = make_plan(data.report, cfg.strategy);

  std::set<std::string> dropped;
  TransformResult staged =
      cfg.strategy == DebloatStrategy::direct_only
          ? stage_direct(data.lock, manifest, plan, &dropped)
          : apply_full_with_closure(data.lock, manifest, plan,
                                    cfg.allow_shadow_fallback, &dropped);
  for (const auto& warning : staged.warnings) {
    err << "warning: " << warning << "\n";
  }
  for (const auto& path : dropped) {
    err << "kept (removal would strand a survivor): " << path << "\n";
  }
  backup_and_write(cfg.package_dir / "package.json",
                   staged.manifest.serialize(), cfg.in_place, out);
  backup_and_write(cfg.package_dir / "package-lock.json",
                   staged.lock.serialize(), cfg.in_place, out);
  return kExitOk;
}

namespace {

int validate_and_emit(const RunConfig& cfg, const DetectionData& data,
                      std::ostream& out, std::ostream& err) {
  const Manifest manifest = load_manifest(cfg.package_dir);

  SystemEnvironment env(environment_options(cfg));
  ValidateOptions options;
  options.strategy = cfg.strategy;
  options.restore_mode = cfg.restore_mode;
  options.allow_shadow_fallback = cfg.allow_shadow_fallback;
  options.workload = cfg.workload;
  options.keep_scratch = cfg.keep_scratch;

  const FinalResult outcome = validate_until_stable(
      data.lock, manifest, data.report, options, env, cfg.package_dir);

  for (const auto& warning : outcome.warnings) {
    err << "warning: " << warning << "\n";
  }

  const fs::path manifest_target = cfg.package_dir / "package.json";
  const fs::path lockfile_target = cfg.package_dir / "package-lock.json";
  const fs::path manifest_out =
      cfg.in_place ? manifest_target
                   : fs::path(manifest_target.string() + ".debloated");
  const fs::path lockfile_out =
      cfg.in_place ? lockfile_target
                   : fs::path(lockfile_target.string() + ".debloated");

  if (cfg.format == OutputFormat::json) {
    out << dump_document(final_result_json(outcome, data.report, data.diag,
                                           manifest_out, lockfile_out));
  } else {
    out << "confirmed bloated: " << outcome.bloated.size() << " instance(s)\n";
    for (const auto& path : outcome.bloated) out << "  " << path << "\n";
    if (!outcome.restored.empty()) {
      out << "restored during validation: " << outcome.restored.size() << "\n";
      for (const auto& path : outcome.restored) out << "  " << path << "\n";
    }
    out << "iterations: " << outcome.iterations << "\n";
  }

  backup_and_write(manifest_target, outcome.manifest_text, cfg.in_place, err);
  backup_and_write(lockfile_target, outcome.lockfile_text, cfg.in_place, err);
  return kExitOk;
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.workload.empty()) {
    throw UsageError("validate requires the workload after --");
  }
  if (!cfg.trace_input) {
    throw UsageError("validate replays a recorded trace; pass --trace FILE "
                     "(use `run` to trace live)");
  }
  const DetectionData data =
      detect_from_trace_file(cfg.package_dir, *cfg.trace_input, cfg);
  return validate_and_emit(cfg, data, out, err);
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.workload.empty()) {
    throw UsageError("run requires the workload after --");
  }
  const DetectionData data = detect_auto(cfg.package_dir, cfg);
  return validate_and_emit(cfg, data, out, err);
}

int cmd_corpus(const RunConfig& cfg, const fs::path& list_file,
               std::ostream& out, std::ostream& err) {
  std::ifstream in(list_file);
  if (!in) throw UsageError("cannot read package list " + list_file.string());
  std::vector<fs::path> dirs;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    dirs.emplace_back(line);
  }

  std::vector<CorpusRow> rows(dirs.size());
  const int jobs = std::max(1, cfg.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dirs.size()) break;
      rows[i] = corpus_row(dirs[i], cfg);
    }
  };
  if (jobs == 1 || dirs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t failures = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      ++failures;
      err << "warning: " << row.name << ": " << row.error << "\n";
    }
  }
  out << render_corpus(summarize_corpus(std::move(rows)), cfg.format);
  if (failures > 0) {
    err << "warning: " << failures << " package(s) failed to analyze\n";
  }
  return kExitOk;
}

int report_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (e.kind() == ErrorKind::workload_broken_independently) {
    return kExitBaselineFailure;
  }
  return kExitInputError;
}

}  // namespace depprune
