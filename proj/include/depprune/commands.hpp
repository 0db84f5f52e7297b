#pragma once

#include "depprune/errors.hpp"
#include "depprune/report.hpp"
#include "depprune/transform.hpp"
#include "depprune/validate.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace depprune {

// Exit-code contract: 0 success, 1 workload failure passthrough (trace),
// 2 input error, 3 baseline failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitBaselineFailure = 3;

struct RunConfig {
  std::filesystem::path package_dir;
  std::optional<std::filesystem::path> trace_input;
  std::vector<std::string> workload;
  DebloatStrategy strategy = DebloatStrategy::full_scale;
  std::set<std::string> extensions = {".js", ".json"};
  bool allow_shadow_fallback = false;
  bool in_place = false;
  bool stat_family = false;  // widen tracked syscalls to the stat family
  int timeout_s = 1800;
  OutputFormat format = OutputFormat::text;
  int jobs = 1;
  std::string tracer = "strace";
  std::vector<std::string> install_cmd = {"npm", "ci"};
  std::optional<std::vector<std::string>> env_allowlist;
  RestoreMode restore_mode = RestoreMode::targeted_batch;
  std::optional<std::filesystem::path> trace_out;
  bool keep_scratch = false;

  std::filesystem::path trace_out_path() const {
    return trace_out ? *trace_out : package_dir / "depprune.trace.log";
  }
};

// Detection products shared by detect/debloat/validate/run.
struct DetectionData {
  Lockfile lock;
  BloatReport report;
  DetectDiagnostics diag;
};

DetectionData detect_from_trace_file(const std::filesystem::path& package_dir,
                                     const std::filesystem::path& trace_file,
                                     const RunConfig& cfg);

int cmd_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_debloat(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_corpus(const RunConfig& cfg, const std::filesystem::path& list_file,
               std::ostream& out, std::ostream& err);

// Maps a thrown Error to the documented exit code and prints the message.
int report_error(const Error& e, std::ostream& err);

}  // namespace depprune
