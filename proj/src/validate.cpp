#include "depprune/validate.hpp"

#include "depprune/errors.hpp"
#include "depprune/paths.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include <sys/file.h>
#include <unistd.h>

namespace depprune {

namespace fs = std::filesystem;

SystemEnvironment::SystemEnvironment(SystemEnvironmentOptions options)
    : options_(std::move(options)) {}

void SystemEnvironment::rebuild(const fs::path& package_dir) {
  std::error_code ec;
  fs::remove_all(package_dir / "node_modules", ec);

  ExecOptions exec;
  exec.cwd = package_dir;
  exec.timeout_s = options_.timeout_s;
  exec.env_allowlist = options_.env_allowlist;
  const ExecResult result = run_process(options_.install_argv, exec);
  if (result.exit_code != 0 || result.timed_out) {
    throw InstallFailed(result.exit_code, result.output);
  }
}

std::vector<std::string> tracer_argv(const std::string& tracer,
                                     const fs::path& log,
                                     const std::vector<std::string>& workload) {
  std::vector<std::string> argv = {
      tracer,  "-f", "-qq", "-e", "trace=open,openat,openat2",
      "-s", "4096", "-o", log.string(), "--"};
  argv.insert(argv.end(), workload.begin(), workload.end());
  return argv;
}

WorkloadResult SystemEnvironment::run_workload(
    const fs::path& package_dir, const std::vector<std::string>& argv,
    bool traced) {
  std::vector<std::string> full = argv;
  WorkloadResult result;
  if (traced) {
    if (!command_available(options_.tracer)) {
      throw TracerUnavailable(options_.tracer);
    }
    full = tracer_argv(options_.tracer, options_.trace_log, argv);
    result.trace_log = options_.trace_log;
  }
  ExecOptions exec;
  exec.cwd = package_dir;
  exec.timeout_s = options_.timeout_s;
  exec.env_allowlist = options_.env_allowlist;
  const ExecResult run = run_process(full, exec);
  result.exit_code = run.exit_code;
  result.timed_out = run.timed_out;
  result.output = run.output;
  return result;
}

std::set<std::string> extract_missing_modules(const std::string& output) {
  static const std::regex pattern("Cannot find module '([^']+)'");
  std::set<std::string> names;
  for (auto it = std::sregex_iterator(output.begin(), output.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    std::string id = (*it)[1].str();
    if (id.find("node_modules") != std::string::npos) {
      // Path into an installed copy: recover the owning package name.
      try {
        names.insert(paths::map_module_path(
                         paths::lexical_normalize(id.front() == '/' ? id.substr(1)
                                                                    : id))
                         .name);
        continue;
      } catch (const MalformedModulePath&) {
      }
    }
    if (id.empty() || id.front() == '.' || id.front() == '/') {
      continue;  // relative/absolute ids outside node_modules: not a dep name
    }
    // Bare specifier, possibly a subpath import ("pkg/lib/x" -> "pkg").
    const auto comps = paths::split(id);
    if (comps.empty()) continue;
    if (comps[0].front() == '@' && comps.size() >= 2) {
      names.insert(comps[0] + "/" + comps[1]);
    } else {
      names.insert(comps[0]);
    }
  }
  return names;
}

ValidationState repair(ValidationState state, const WorkloadResult& failure,
                       const Lockfile& lock, RestoreMode mode) {
  if (state.candidate_bloated.empty()) throw NoProgress();
  state.last_failure = failure;

  std::set<std::string> to_restore;
  if (mode != RestoreMode::bisect_only) {
    const auto missing = extract_missing_modules(failure.output);
    for (const auto& path : state.candidate_bloated) {
      const DependencyInstance* inst = lock.find(path);
      if (inst && missing.count(inst->name)) to_restore.insert(path);
    }
    if (mode == RestoreMode::targeted_single && to_restore.size() > 1) {
      to_restore = {*to_restore.begin()};
    }
  }
  if (to_restore.empty()) {
    // Nothing extractable: keep the first half, restore the rest.
    const std::size_t keep = state.candidate_bloated.size() / 2;
    auto it = state.candidate_bloated.begin();
    std::advance(it, keep);
    to_restore.insert(it, state.candidate_bloated.end());
  }

  for (const auto& path : to_restore) {
    state.candidate_bloated.erase(path);
    state.confirmed_restored.insert(path);
  }
  return state;
}

void copy_package_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from)) {
    const std::string name = entry.path().filename().string();
    if (name == "node_modules" || name == ".git") continue;
    fs::copy(entry.path(), to / name,
             fs::copy_options::recursive | fs::copy_options::copy_symlinks);
  }
}

namespace {

// Serialized documents for the current candidate set of either strategy.
struct StagedDocs {
  std::string manifest_text;
  std::string lockfile_text;
  std::vector<std::string> warnings;
};

StagedDocs stage_candidates(const Lockfile& lock, const Manifest& manifest,
                            DebloatStrategy strategy,
                            const std::set<std::string>& candidates,
                            bool allow_shadow_fallback,
                            std::set<std::string>* dropped) {
  if (candidates.empty()) {
    return {manifest.serialize(), lock.serialize(), {}};
  }
  DebloatPlan plan;
  plan.strategy = strategy;
  if (strategy == DebloatStrategy::direct_only) {
    for (const auto& path : candidates) {
      plan.remove_direct.insert(lock.find(path)->name);
    }
    auto result = stage_direct(lock, manifest, plan, dropped);
    return {result.manifest.serialize(), result.lock.serialize(),
            std::move(result.warnings)};
  }
  plan.remove_instances = candidates;
  for (const auto& path : candidates) {
    const DependencyInstance* inst = lock.find(path);
    if (inst && inst->is_direct && manifest.has_runtime_dep(inst->name)) {
      plan.remove_direct.insert(inst->name);
    }
  }
  auto result = apply_full_with_closure(lock, manifest, plan,
                                        allow_shadow_fallback, dropped);
  return {result.manifest.serialize(), result.lock.serialize(),
          std::move(result.warnings)};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// One validation loop per package directory at a time.
class ScratchLock {
 public:
  explicit ScratchLock(const fs::path& lock_path) {
    fd_ = open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0 || flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      if (fd_ >= 0) close(fd_);
      throw SpawnFailed("another validation appears to be running on this "
                        "package (could not lock " +
                        lock_path.string() + ")");
    }
    path_ = lock_path;
  }
  ~ScratchLock() {
    if (fd_ >= 0) {
      close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  ScratchLock(const ScratchLock&) = delete;
  ScratchLock& operator=(const ScratchLock&) = delete;

 private:
  int fd_ = -1;
  fs::path path_;
};

}  // namespace

FinalResult validate_until_stable(const Lockfile& lock,
                                  const Manifest& manifest,
                                  const BloatReport& report,
                                  const ValidateOptions& options,
                                  PackageEnvironment& env,
                                  const fs::path& package_dir) {
  const fs::path abs_pkg = fs::absolute(package_dir);
  const fs::path parent = options.scratch_parent.empty()
                              ? abs_pkg.parent_path()
                              : options.scratch_parent;
  const std::string scratch_name =
      ".depprune-scratch-" + abs_pkg.filename().string();
  const fs::path scratch = parent / scratch_name;

  ScratchLock guard(parent / (scratch_name + ".lock"));
  std::error_code ec;
  fs::remove_all(scratch, ec);
  copy_package_tree(abs_pkg, scratch);

  struct ScratchCleanup {
    const fs::path& dir;
    bool keep;
    ~ScratchCleanup() {
      if (!keep) {
        std::error_code cleanup_ec;
        fs::remove_all(dir, cleanup_ec);
      }
    }
  } cleanup{scratch, options.keep_scratch};

  // Baseline first: the untouched documents must already install and pass.
  try {
    env.rebuild(scratch);
  } catch (const InstallFailed& e) {
    throw WorkloadBrokenIndependently(e.output());
  }
  const WorkloadResult baseline =
      env.run_workload(scratch, options.workload, false);
  if (!baseline.ok()) throw WorkloadBrokenIndependently(baseline.output);

  ValidationState state;
  if (options.strategy == DebloatStrategy::direct_only) {
    for (const auto& name : report.direct_bloated) {
      if (auto path = lock.resolve("", name)) {
        state.candidate_bloated.insert(*path);
      }
    }
  } else {
    state.candidate_bloated = report.unaccessed;
  }

  FinalResult outcome;
  for (;;) {
    std::set<std::string> dropped;
    StagedDocs staged =
        stage_candidates(lock, manifest, options.strategy,
                         state.candidate_bloated,
                         options.allow_shadow_fallback, &dropped);
    for (const auto& path : dropped) {
      // Targets the transform refused to remove are restored, not bloated.
      state.candidate_bloated.erase(path);
      state.confirmed_restored.insert(path);
    }
    write_file(scratch / "package.json", staged.manifest_text);
    write_file(scratch / "package-lock.json", staged.lockfile_text);

    ++state.iteration;
    if (options.max_iterations > 0 &&
        state.iteration > options.max_iterations) {
      throw NoProgress();
    }

    WorkloadResult run;
    try {
      env.rebuild(scratch);
      run = env.run_workload(scratch, options.workload, false);
    } catch (const InstallFailed& e) {
      run.exit_code = e.exit_code();
      run.output = e.output();
    }
    if (run.ok()) {
      outcome.bloated = state.candidate_bloated;
      outcome.manifest_text = std::move(staged.manifest_text);
      outcome.lockfile_text = std::move(staged.lockfile_text);
      outcome.warnings = std::move(staged.warnings);
      break;
    }
    state = repair(std::move(state), run, lock, options.restore_mode);
  }

  outcome.iterations = state.iteration;
  outcome.restored = state.confirmed_restored;
  return outcome;
}

}  // namespace depprune
