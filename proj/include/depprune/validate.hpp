#pragma once

#include "depprune/detect.hpp"
#include "depprune/lockfile.hpp"
#include "depprune/manifest.hpp"
#include "depprune/subprocess.hpp"
#include "depprune/transform.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace depprune {

struct WorkloadResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string output;
  std::optional<std::filesystem::path> trace_log;

  bool ok() const { return exit_code == 0 && !timed_out; }
};

// Rebuild and workload execution behind an interface so the validation loop
// can be driven hermetically in tests.
class PackageEnvironment {
 public:
  virtual ~PackageEnvironment() = default;

  // Clean-install semantics: prior node_modules removed first, then the
  // package manager installs exactly what the lockfile specifies.
  // Throws InstallFailed on nonzero exit.
  virtual void rebuild(const std::filesystem::path& package_dir) = 0;

  virtual WorkloadResult run_workload(const std::filesystem::path& package_dir,
                                      const std::vector<std::string>& argv,
                                      bool traced) = 0;
};

struct SystemEnvironmentOptions {
  std::vector<std::string> install_argv = {"npm", "ci"};
  std::string tracer = "strace";
  int timeout_s = 1800;
  std::optional<std::vector<std::string>> env_allowlist;
  std::filesystem::path trace_log;  // where traced runs write their log
};

class SystemEnvironment : public PackageEnvironment {
 public:
  explicit SystemEnvironment(SystemEnvironmentOptions options);

  void rebuild(const std::filesystem::path& package_dir) override;
  WorkloadResult run_workload(const std::filesystem::path& package_dir,
                              const std::vector<std::string>& argv,
                              bool traced) override;

 private:
  SystemEnvironmentOptions options_;
};

// Builds the tracer argv wrapping `workload`: follow children, trace the
// file-open syscall family, write to `log`.
std::vector<std::string> tracer_argv(const std::string& tracer,
                                     const std::filesystem::path& log,
                                     const std::vector<std::string>& workload);

// Extracts dependency names from loader failures ("Cannot find module 'x'"),
// reducing path-shaped module ids to the owning package name.
std::set<std::string> extract_missing_modules(const std::string& output);

enum class RestoreMode { targeted_batch, targeted_single, bisect_only };

struct ValidationState {
  std::set<std::string> candidate_bloated;   // install paths
  std::set<std::string> confirmed_restored;  // install paths
  int iteration = 0;
  std::optional<WorkloadResult> last_failure;
};

// Shrinks the candidate set after a failed run: restore candidates matching
// names extracted from the failure output, or bisect when nothing matches.
// The returned candidate set is strictly smaller. Throws NoProgress when
// there is nothing left to restore.
ValidationState repair(ValidationState state, const WorkloadResult& failure,
                       const Lockfile& lock, RestoreMode mode);

struct ValidateOptions {
  DebloatStrategy strategy = DebloatStrategy::full_scale;
  RestoreMode restore_mode = RestoreMode::targeted_batch;
  bool allow_shadow_fallback = false;
  std::vector<std::string> workload;
  std::filesystem::path scratch_parent;  // default: package_dir's parent
  bool keep_scratch = false;
  int max_iterations = 0;  // 0 = bounded only by candidate count
};

struct FinalResult {
  std::set<std::string> bloated;  // confirmed-safe removals (install paths)
  std::string manifest_text;      // final debloated documents
  std::string lockfile_text;
  int iterations = 0;
  std::set<std::string> restored;
  std::vector<std::string> warnings;
};

// Stages the chosen strategy's removals in a scratch copy of package_dir,
// then rebuilds and re-executes the workload, restoring mistakenly removed
// instances until the run passes. The baseline (no removals) must pass
// first; otherwise WorkloadBrokenIndependently is thrown. Terminates: the
// candidate set shrinks every non-final iteration.
FinalResult validate_until_stable(const Lockfile& lock,
                                  const Manifest& manifest,
                                  const BloatReport& report,
                                  const ValidateOptions& options,
                                  PackageEnvironment& env,
                                  const std::filesystem::path& package_dir);

// Copies a package directory for staging, skipping node_modules and VCS
// metadata. Exposed for the CLI's scratch handling.
void copy_package_tree(const std::filesystem::path& from,
                       const std::filesystem::path& to);

}  // namespace depprune
