#pragma once

#include "depprune/detect.hpp"
#include "depprune/json_util.hpp"
#include "depprune/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace depprune {

enum class OutputFormat { text, json };

// Side information rendered next to the core report.
struct DetectDiagnostics {
  std::size_t module_files_accessed = 0;
  std::set<std::string> untracked_accesses;  // install paths not in the lockfile
  std::set<std::string> dev_accesses;        // accessed dev instances (excluded)
  std::set<std::string> unmapped_paths;
  std::size_t bundled_instances = 0;
  TraceStats trace;
};

// Two-decimal half-up percent with trailing zeros stripped: 680/681 renders
// "99.85", 1470/1470 renders "100", 2/16 renders "12.5". Integer-exact.
std::string render_percent(std::size_t numer, std::size_t denom);

ojson report_to_json(const BloatReport& report, const DetectDiagnostics& diag);
std::string render_report(const BloatReport& report,
                          const DetectDiagnostics& diag, OutputFormat format);

// Parses the JSON produced by render_report back into the core report
// (diagnostics are not part of report identity).
BloatReport report_from_json(const std::string& text);

struct SpearmanResult {
  double rs = 0.0;
  double p_two_tailed = 1.0;
};

// Rank correlation with average ranks for ties; two-tailed p-value from the
// t approximation with n-2 degrees of freedom.
SpearmanResult spearman(const std::vector<double>& xs,
                        const std::vector<double>& ys);

struct CorpusRow {
  std::string name;
  std::size_t total_runtime = 0;
  std::size_t direct_count = 0;
  std::size_t direct_bloated = 0;
  std::size_t cascade = 0;
  std::size_t removed = 0;   // Prune_d numerator for the chosen strategy
  std::size_t original = 0;  // Prune_d denominator
  double r_d = 0.0;
  std::string error;  // nonempty when the package failed to analyze
};

struct CorpusSummary {
  std::vector<CorpusRow> rows;
  std::size_t total_runtime = 0;
  std::size_t total_direct = 0;
  std::size_t total_direct_bloated = 0;
  std::size_t total_cascade = 0;
  std::size_t total_removed = 0;
  std::optional<SpearmanResult> correlation;  // bloat fraction vs tree size
};

CorpusSummary summarize_corpus(std::vector<CorpusRow> rows);
std::string render_corpus(const CorpusSummary& summary, OutputFormat format);

}  // namespace depprune
