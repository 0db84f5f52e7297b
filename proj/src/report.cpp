#include "depprune/report.hpp"

#include "depprune/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace depprune {

namespace {
constexpr int kReportSchemaVersion = 1;
}

std::string render_percent(std::size_t numer, std::size_t denom) {
  if (denom == 0) throw ZeroTotal();
  // Hundredths of a percent, rounded half-up, in exact integer arithmetic.
  const unsigned long long scaled =
      (2ULL * 10000ULL * numer + denom) / (2ULL * denom);
  std::string out = std::to_string(scaled / 100);
  const unsigned long long frac = scaled % 100;
  if (frac != 0) {
    out += '.';
    out += static_cast<char>('0' + frac / 10);
    if (frac % 10 != 0) out += static_cast<char>('0' + frac % 10);
  }
  return out;
}

namespace {

ojson sorted_array(const std::set<std::string>& values) {
  ojson arr = ojson::array();
  for (const auto& v : values) arr.push_back(v);
  return arr;
}

std::set<std::string> array_to_set(const ojson& arr) {
  std::set<std::string> out;
  for (const auto& v : arr) out.insert(v.get<std::string>());
  return out;
}

}  // namespace

ojson report_to_json(const BloatReport& report, const DetectDiagnostics& diag) {
  ojson doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["total_runtime"] = report.total_runtime;
  ojson counts;
  counts["accessed"] = report.accessed.size();
  counts["unaccessed"] = report.unaccessed.size();
  counts["direct_bloated"] = report.direct_bloated.size();
  counts["indirect_bloated"] = report.indirect_bloated.size();
  counts["cascade_from_direct"] = report.cascade_from_direct.size();
  counts["shadow_candidates"] = report.shadow_candidates.size();
  doc["counts"] = std::move(counts);
  doc["accessed"] = sorted_array(report.accessed);
  doc["unaccessed"] = sorted_array(report.unaccessed);
  doc["direct_bloated"] = sorted_array(report.direct_bloated);
  doc["indirect_bloated"] = sorted_array(report.indirect_bloated);
  doc["cascade_from_direct"] = sorted_array(report.cascade_from_direct);
  doc["shadow_candidates"] = sorted_array(report.shadow_candidates);
  doc["r_d"] = report.r_d;
  doc["r_d_percent"] =
      report.total_runtime == 0
          ? "0"
          : render_percent(report.unaccessed.size(), report.total_runtime);
  doc["prune_direct_only"] = {
      {"removed", report.direct_only_removed()},
      {"original", report.total_runtime},
      {"percent", report.total_runtime == 0
                      ? "0"
                      : render_percent(report.direct_only_removed(),
                                       report.total_runtime)}};

  ojson diagnostics;
  diagnostics["orphans"] = sorted_array(report.orphans);
  diagnostics["module_files_accessed"] = diag.module_files_accessed;
  diagnostics["untracked_accesses"] = sorted_array(diag.untracked_accesses);
  diagnostics["dev_accesses"] = sorted_array(diag.dev_accesses);
  diagnostics["unmapped_paths"] = sorted_array(diag.unmapped_paths);
  diagnostics["bundled_instances"] = diag.bundled_instances;
  ojson trace;
  trace["lines"] = diag.trace.lines;
  trace["events"] = diag.trace.events;
  trace["joined"] = diag.trace.joined;
  trace["skipped"] = {{"other_syscall", diag.trace.skipped_other_syscall},
                      {"signal", diag.trace.skipped_signal},
                      {"exit", diag.trace.skipped_exit},
                      {"unjoinable", diag.trace.skipped_unjoinable},
                      {"malformed", diag.trace.skipped_malformed}};
  diagnostics["trace"] = std::move(trace);
  doc["diagnostics"] = std::move(diagnostics);
  return doc;
}

BloatReport report_from_json(const std::string& text) {
  const ojson doc = parse_document(text, "report");
  BloatReport report;
  report.total_runtime = doc.at("total_runtime").get<std::size_t>();
  report.accessed = array_to_set(doc.at("accessed"));
  report.unaccessed = array_to_set(doc.at("unaccessed"));
  report.direct_bloated = array_to_set(doc.at("direct_bloated"));
  report.indirect_bloated = array_to_set(doc.at("indirect_bloated"));
  report.cascade_from_direct = array_to_set(doc.at("cascade_from_direct"));
  report.shadow_candidates = array_to_set(doc.at("shadow_candidates"));
  report.orphans = array_to_set(doc.at("diagnostics").at("orphans"));
  report.r_d = doc.at("r_d").get<double>();
  return report;
}

namespace {

void render_path_list(std::ostream& os, const std::string& label,
                      const std::set<std::string>& values) {
  os << label << " (" << values.size() << ")\n";
  for (const auto& v : values) os << "  " << v << "\n";
}

}  // namespace

std::string render_report(const BloatReport& report,
                          const DetectDiagnostics& diag, OutputFormat format) {
  if (format == OutputFormat::json) {
    return dump_document(report_to_json(report, diag));
  }

  std::ostringstream os;
  const std::size_t total = report.total_runtime;
  os << "runtime instances   " << total << "\n";
  os << "accessed            " << report.accessed.size() << "\n";
  os << "unaccessed          " << report.unaccessed.size() << "\n";
  os << "direct bloated      " << report.direct_bloated.size() << "\n";
  os << "indirect bloated    " << report.indirect_bloated.size() << "\n";
  os << "cascade from direct " << report.cascade_from_direct.size() << "\n";
  if (total > 0) {
    os << "full-scale removal  " << report.unaccessed.size() << " / " << total
       << "  (" << render_percent(report.unaccessed.size(), total) << "%)\n";
    os << "direct-only removal " << report.direct_only_removed() << " / "
       << total << "  ("
       << render_percent(report.direct_only_removed(), total) << "%)\n";
  }
  if (!report.direct_bloated.empty()) {
    render_path_list(os, "direct bloated names", report.direct_bloated);
  }
  if (!report.indirect_bloated.empty()) {
    render_path_list(os, "indirect bloated instances", report.indirect_bloated);
  }
  if (!report.shadow_candidates.empty()) {
    render_path_list(os,
                     "shadow candidates (ancestor copy exists; review only)",
                     report.shadow_candidates);
  }
  if (!report.orphans.empty()) {
    render_path_list(os, "orphan lockfile entries", report.orphans);
  }
  if (!diag.untracked_accesses.empty()) {
    render_path_list(os, "accessed but not in lockfile",
                     diag.untracked_accesses);
  }
  os << "module files accessed " << diag.module_files_accessed
     << "; trace lines " << diag.trace.lines << " (events "
     << diag.trace.events << ", skipped " << diag.trace.skipped_total()
     << ")\n";
  return os.str();
}

namespace {

// Average ranks (ties share the mean of the positions they occupy).
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant ranks: undefined, use 0
  return sxy / std::sqrt(sxx * syy);
}

double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

// Two-tailed p for a t statistic with nu degrees of freedom:
// I_{nu/(nu+t^2)}(nu/2, 1/2).
double t_two_tailed(double t, double nu) {
  return incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

}  // namespace

SpearmanResult spearman(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw LengthMismatch(xs.size(), ys.size());
  if (xs.size() < 3) throw TooFewPoints(xs.size());

  SpearmanResult result;
  result.rs = pearson(average_ranks(xs), average_ranks(ys));
  const double n = static_cast<double>(xs.size());
  if (std::fabs(result.rs) >= 1.0) {
    result.p_two_tailed = 0.0;
  } else {
    const double t =
        result.rs * std::sqrt((n - 2.0) / (1.0 - result.rs * result.rs));
    result.p_two_tailed = t_two_tailed(std::fabs(t), n - 2.0);
  }
  return result;
}

CorpusSummary summarize_corpus(std::vector<CorpusRow> rows) {
  CorpusSummary summary;
  std::vector<double> fractions;
  std::vector<double> sizes;
  for (const auto& row : rows) {
    if (!row.error.empty()) continue;
    summary.total_runtime += row.total_runtime;
    summary.total_direct += row.direct_count;
    summary.total_direct_bloated += row.direct_bloated;
    summary.total_cascade += row.cascade;
    summary.total_removed += row.removed;
    if (row.original > 0) {
      fractions.push_back(static_cast<double>(row.removed) /
                          static_cast<double>(row.original));
      sizes.push_back(static_cast<double>(row.total_runtime));
    }
  }
  if (fractions.size() >= 3) {
    summary.correlation = spearman(fractions, sizes);
  }
  summary.rows = std::move(rows);
  // Rank by removal ratio, largest reduction first; errors sink to the end.
  std::stable_sort(summary.rows.begin(), summary.rows.end(),
                   [](const CorpusRow& a, const CorpusRow& b) {
                     if (a.error.empty() != b.error.empty()) {
                       return a.error.empty();
                     }
                     return a.r_d > b.r_d;
                   });
  return summary;
}

std::string render_corpus(const CorpusSummary& summary, OutputFormat format) {
  if (format == OutputFormat::json) {
    ojson doc;
    doc["schema_version"] = kReportSchemaVersion;
    ojson rows = ojson::array();
    for (const auto& row : summary.rows) {
      ojson r;
      r["name"] = row.name;
      if (!row.error.empty()) {
        r["error"] = row.error;
        rows.push_back(std::move(r));
        continue;
      }
      r["total_runtime"] = row.total_runtime;
      r["direct_count"] = row.direct_count;
      r["direct_bloated"] = row.direct_bloated;
      r["cascade"] = row.cascade;
      r["prune_d"] = {{"removed", row.removed}, {"original", row.original}};
      r["r_d"] = row.r_d;
      r["r_d_percent"] = row.original == 0
                             ? "0"
                             : render_percent(row.removed, row.original);
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["aggregate"] = {{"total_runtime", summary.total_runtime},
                        {"direct_count", summary.total_direct},
                        {"direct_bloated", summary.total_direct_bloated},
                        {"cascade", summary.total_cascade},
                        {"removed", summary.total_removed}};
    if (summary.correlation) {
      doc["spearman"] = {{"rs", summary.correlation->rs},
                         {"p_two_tailed", summary.correlation->p_two_tailed}};
    } else {
      doc["spearman"] = nullptr;
    }
    return dump_document(doc);
  }

  std::ostringstream os;
  os << std::left << std::setw(28) << "package" << std::right << std::setw(8)
     << "#D" << std::setw(8) << "#T" << std::setw(8) << "#BD" << std::setw(8)
     << "#BD->I" << std::setw(16) << "pruned" << std::setw(10) << "R_d %"
     << "\n";
  for (const auto& row : summary.rows) {
    if (!row.error.empty()) {
      os << std::left << std::setw(28) << row.name << "error: " << row.error
         << "\n";
      continue;
    }
    std::string pruned = std::to_string(row.removed) + " / " +
                         std::to_string(row.original);
    os << std::left << std::setw(28) << row.name << std::right << std::setw(8)
       << row.direct_count << std::setw(8) << row.total_runtime << std::setw(8)
       << row.direct_bloated << std::setw(8) << row.cascade << std::setw(16)
       << pruned << std::setw(10)
       << (row.original == 0 ? "0" : render_percent(row.removed, row.original))
       << "\n";
  }
  os << std::left << std::setw(28) << "total" << std::right << std::setw(8)
     << summary.total_direct << std::setw(8) << summary.total_runtime
     << std::setw(8) << summary.total_direct_bloated << std::setw(8)
     << summary.total_cascade << std::setw(16)
     << (std::to_string(summary.total_removed) + " / " +
         std::to_string(summary.total_runtime))
     << "\n";
  if (summary.correlation) {
    os << "spearman rs " << summary.correlation->rs << " (two-tailed p "
       << summary.correlation->p_two_tailed << ")\n";
  }
  return os.str();
}

}  // namespace depprune
