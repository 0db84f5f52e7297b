#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace depprune {

struct ExecResult {
  int exit_code = -1;  // 128+N when terminated by signal N
  bool timed_out = false;
  std::string output;  // stdout and stderr interleaved
};

struct ExecOptions {
  std::filesystem::path cwd;
  int timeout_s = 0;  // 0 = no limit
  // When set, the child environment contains exactly these variables
  // (values taken from the current environment; absent ones are skipped).
  std::optional<std::vector<std::string>> env_allowlist;
};

// Runs argv[0] with fork/exec in its own process group, capturing combined
// output. On timeout the whole group is killed. Throws SpawnFailed when the
// child cannot be started at all.
ExecResult run_process(const std::vector<std::string>& argv,
                       const ExecOptions& options);

bool command_on_path(const std::string& name);

// command_on_path, but a name containing '/' is checked directly.
bool command_available(const std::string& name);

}  // namespace depprune
