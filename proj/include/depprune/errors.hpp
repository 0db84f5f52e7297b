#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace depprune {

enum class ErrorKind {
  malformed_document,
  duplicate_key,
  unsupported_lockfile_version,
  bad_install_path,
  unresolvable_dependency,
  malformed_module_path,
  access_outside_lockfile,
  zero_total,
  unknown_direct_dependency,
  removal_breaks_survivor,
  install_failed,
  spawn_failed,
  tracer_unavailable,
  no_progress,
  workload_broken_independently,
  length_mismatch,
  too_few_points,
  usage,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class MalformedDocument : public Error {
 public:
  MalformedDocument(std::string message, int line = 0, int column = 0)
      : Error(ErrorKind::malformed_document, std::move(message)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class DuplicateKey : public Error {
 public:
  DuplicateKey(const std::string& section, const std::string& key)
      : Error(ErrorKind::duplicate_key,
              "duplicate key \"" + key + "\" in " + section),
        section_(section),
        key_(key) {}

  const std::string& section() const noexcept { return section_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string section_;
  std::string key_;
};

class UnsupportedLockfileVersion : public Error {
 public:
  explicit UnsupportedLockfileVersion(std::string message)
      : Error(ErrorKind::unsupported_lockfile_version, std::move(message)) {}
};

class BadInstallPath : public Error {
 public:
  BadInstallPath(const std::string& path, const std::string& why)
      : Error(ErrorKind::bad_install_path,
              "bad install path \"" + path + "\": " + why),
        path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class UnresolvableDependency : public Error {
 public:
  UnresolvableDependency(const std::string& requester, const std::string& name)
      : Error(ErrorKind::unresolvable_dependency,
              "\"" + name + "\" requested by \"" +
                  (requester.empty() ? std::string("<root>") : requester) +
                  "\" resolves to no installed instance"),
        requester_(requester),
        name_(name) {}

  const std::string& requester() const noexcept { return requester_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string requester_;
  std::string name_;
};

class MalformedModulePath : public Error {
 public:
  MalformedModulePath(const std::string& path, const std::string& why)
      : Error(ErrorKind::malformed_module_path,
              "cannot map module path \"" + path + "\": " + why) {}
};

class AccessOutsideLockfile : public Error {
 public:
  explicit AccessOutsideLockfile(std::vector<std::string> paths)
      : Error(ErrorKind::access_outside_lockfile,
              "accessed install paths are not runtime instances of the "
              "lockfile (first: " +
                  (paths.empty() ? std::string("?") : paths.front()) + ")"),
        paths_(std::move(paths)) {}

  const std::vector<std::string>& paths() const noexcept { return paths_; }

 private:
  std::vector<std::string> paths_;
};

class ZeroTotal : public Error {
 public:
  ZeroTotal() : Error(ErrorKind::zero_total, "total dependency count is zero") {}
};

class UnknownDirectDependency : public Error {
 public:
  explicit UnknownDirectDependency(const std::string& name)
      : Error(ErrorKind::unknown_direct_dependency,
              "\"" + name + "\" is not a declared runtime dependency"),
        name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// One surviving reference whose removal target cannot be deleted safely.
struct SurvivorBreak {
  std::string survivor;        // install path of the requesting instance ("" = root)
  std::string dep_name;        // declared name that no longer resolves as before
  std::string removed_target;  // install path the name resolved to pre-removal
};

class RemovalBreaksSurvivor : public Error {
 public:
  explicit RemovalBreaksSurvivor(std::vector<SurvivorBreak> breaks)
      : Error(ErrorKind::removal_breaks_survivor, describe(breaks)),
        breaks_(std::move(breaks)) {}

  const std::vector<SurvivorBreak>& breaks() const noexcept { return breaks_; }

 private:
  static std::string describe(const std::vector<SurvivorBreak>& breaks) {
    std::string msg = "plan removes instances still needed by survivors:";
    for (const auto& b : breaks) {
      msg += " [" + (b.survivor.empty() ? std::string("<root>") : b.survivor) +
             " -> " + b.dep_name + " @ " + b.removed_target + "]";
    }
    return msg;
  }

  std::vector<SurvivorBreak> breaks_;
};

class InstallFailed : public Error {
 public:
  InstallFailed(int exit_code, std::string output)
      : Error(ErrorKind::install_failed,
              "clean install failed with exit code " + std::to_string(exit_code)),
        exit_code_(exit_code),
        output_(std::move(output)) {}

  int exit_code() const noexcept { return exit_code_; }
  const std::string& output() const noexcept { return output_; }

 private:
  int exit_code_;
  std::string output_;
};

class SpawnFailed : public Error {
 public:
  explicit SpawnFailed(std::string message)
      : Error(ErrorKind::spawn_failed, std::move(message)) {}
};

class TracerUnavailable : public Error {
 public:
  explicit TracerUnavailable(const std::string& tracer)
      : Error(ErrorKind::tracer_unavailable,
              "tracer \"" + tracer +
                  "\" not found on PATH; install it (e.g. apt-get install "
                  "strace) or record a log elsewhere and pass --trace") {}
};

class NoProgress : public Error {
 public:
  NoProgress()
      : Error(ErrorKind::no_progress,
              "workload keeps failing with no removal candidates left; it is "
              "broken independently of debloating") {}
};

class WorkloadBrokenIndependently : public Error {
 public:
  explicit WorkloadBrokenIndependently(std::string output)
      : Error(ErrorKind::workload_broken_independently,
              "baseline workload run failed before any removal"),
        output_(std::move(output)) {}

  const std::string& output() const noexcept { return output_; }

 private:
  std::string output_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t xs, std::size_t ys)
      : Error(ErrorKind::length_mismatch,
              "sample lengths differ: " + std::to_string(xs) + " vs " +
                  std::to_string(ys)) {}
};

class TooFewPoints : public Error {
 public:
  explicit TooFewPoints(std::size_t n)
      : Error(ErrorKind::too_few_points,
              "need at least 3 points, got " + std::to_string(n)) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(std::string message)
      : Error(ErrorKind::usage, std::move(message)) {}
};

}  // namespace depprune
