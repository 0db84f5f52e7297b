#pragma once

#include "depprune/paths.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace depprune {

class Lockfile;

// One parsed file-access record from tracer output.
struct TraceEvent {
  long pid = 0;
  std::string syscall;
  std::string path;       // first quoted string argument
  long long result = 0;   // negative = failure
  std::string errno_tag;  // e.g. "ENOENT" when the call failed

  bool operator==(const TraceEvent&) const = default;
};

struct TraceStats {
  std::size_t lines = 0;
  std::size_t events = 0;
  std::size_t skipped_other_syscall = 0;
  std::size_t skipped_signal = 0;
  std::size_t skipped_exit = 0;
  std::size_t skipped_unjoinable = 0;
  std::size_t skipped_malformed = 0;
  std::size_t joined = 0;

  std::size_t skipped_total() const {
    return skipped_other_syscall + skipped_signal + skipped_exit +
           skipped_unjoinable + skipped_malformed;
  }
};

struct TraceOptions {
  // Read-oriented open family. The stat family is excluded by default: the
  // module resolver stats many candidates it never loads.
  std::set<std::string> syscalls = {"open", "openat", "openat2"};

  static TraceOptions with_stat_family();
};

// Line-oriented parser for tracer logs (decimal pid prefix, syscall name,
// parenthesized args with a quoted path, " = " and decimal result, optional
// errno symbol). Interleaved unfinished/resumed fragments are joined by
// (pid, syscall); unjoinable fragments are skipped and counted.
class TraceParser {
 public:
  explicit TraceParser(TraceOptions options = {});

  std::optional<TraceEvent> feed(const std::string& line);

  // Flushes pending unfinished fragments into the unjoinable counter.
  void finish();

  const TraceStats& stats() const noexcept { return stats_; }

 private:
  std::optional<TraceEvent> parse_complete(long pid, const std::string& body);

  TraceOptions options_;
  TraceStats stats_;
  std::map<std::pair<long, std::string>, std::string> pending_;
};

// Stateless convenience for one complete line with default options.
std::optional<TraceEvent> parse_trace_line(const std::string& line);

// Module files of interest reduced from a trace.
struct AccessSet {
  std::set<std::string> module_paths;    // normalized absolute file paths
  std::set<std::string> instance_paths;  // derived install paths
  std::set<std::string> unmapped_paths;  // diagnostics: in-tree but unmappable

  bool operator==(const AccessSet&) const = default;
};

struct FilterOptions {
  std::set<std::string> extensions = {".js", ".json"};
};

// Streaming reducer: successful opens of accepted-extension files under
// package_root/node_modules. Order-independent; safe to feed from a live
// tracer pipe (single writer).
class AccessCollector {
 public:
  AccessCollector(const std::string& package_root_abs,
                  FilterOptions options = {});

  void add(const TraceEvent& event);
  const AccessSet& result() const noexcept { return access_; }
  AccessSet take() { return std::move(access_); }

 private:
  std::string root_prefix_;  // normalized root + "/node_modules/"
  std::string root_;         // normalized root + "/"
  FilterOptions options_;
  AccessSet access_;
};

AccessSet filter_module_accesses(const std::vector<TraceEvent>& events,
                                 const std::string& package_root_abs,
                                 FilterOptions options = {});

// Maps an accepted module path to (install_path, dependency name).
paths::ModuleMapping map_path_to_instance(const std::string& module_path,
                                          const std::string& package_root_abs);

struct AccessedDeps {
  std::set<std::string> known;      // install paths present in the lockfile
  std::set<std::string> untracked;  // accessed but absent from the lockfile
};

AccessedDeps accessed_dependencies(const AccessSet& access,
                                   const Lockfile& lock);

// Reads a whole log (file stream or stdin), returning the collected events.
std::vector<TraceEvent> read_trace_stream(std::istream& in, TraceParser& parser);

}  // namespace depprune
