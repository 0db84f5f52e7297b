#pragma once

#include "depprune/lockfile.hpp"

#include <set>
#include <string>

namespace depprune {

// Classified detection outcome over the runtime instances of one lockfile.
struct BloatReport {
  std::size_t total_runtime = 0;
  std::set<std::string> accessed;             // install paths
  std::set<std::string> unaccessed;           // install paths
  std::set<std::string> direct_bloated;       // dep names
  std::set<std::string> indirect_bloated;     // install paths
  std::set<std::string> cascade_from_direct;  // install paths
  std::set<std::string> shadow_candidates;    // install paths
  std::set<std::string> orphans;              // install paths (diagnostics)
  double r_d = 0.0;                           // full-scale removal ratio

  std::size_t full_scale_removed() const { return unaccessed.size(); }
  std::size_t direct_only_removed() const {
    return direct_bloated.size() + cascade_from_direct.size();
  }

  bool operator==(const BloatReport&) const = default;
};

// Exact removal ratio dep_r / dep_o. Throws ZeroTotal when dep_o == 0.
double compute_rd(std::size_t dep_r, std::size_t dep_o);

// Accessed nested instances whose name also resolves at an ancestor level:
// after their removal the runtime resolver would fall back to the other
// copy. Surfaced for review, never auto-removed.
std::set<std::string> shadow_candidates(const Lockfile& lock,
                                        const std::set<std::string>& accessed);

// Splits runtime instances into accessed/unaccessed and derives the
// direct/indirect classification, the cascade of the direct removals, and
// shadow flags. `accessed` must be a subset of the runtime instances;
// anything else throws AccessOutsideLockfile.
BloatReport detect(const Lockfile& lock, const std::set<std::string>& accessed);

}  // namespace depprune
