#pragma once

#include "depprune/detect.hpp"
#include "depprune/lockfile.hpp"
#include "depprune/manifest.hpp"

#include <set>
#include <string>
#include <vector>

namespace depprune {

enum class DebloatStrategy { direct_only, full_scale };

struct DebloatPlan {
  DebloatStrategy strategy = DebloatStrategy::direct_only;
  std::set<std::string> remove_direct;     // dep names
  std::set<std::string> remove_instances;  // install paths (full_scale only)
};

// direct_only removes exactly the direct bloated names; full_scale removes
// every unaccessed instance, all at once.
DebloatPlan make_plan(const BloatReport& report, DebloatStrategy strategy);

// Drops the planned names from the manifest's runtime section; everything
// else (dev section, key order, unrelated fields) is untouched.
Manifest apply_direct(const Manifest& manifest, const DebloatPlan& plan);

struct TransformResult {
  Lockfile lock;
  Manifest manifest;
  std::vector<std::string> warnings;
};

// Rewrites both documents for a full-scale plan:
//  - planned install paths are deleted from the packages map (paths already
//    absent are treated as removed, which makes application idempotent);
//  - surviving instances lose declared-dep references that no longer
//    resolve anywhere and whose pre-removal target was removed;
//  - root declarations and manifest runtime deps are cleaned the same way;
//  - a reference whose target would silently re-resolve to an ancestor copy
//    raises RemovalBreaksSurvivor unless allow_shadow_fallback is set.
TransformResult apply_full(const Lockfile& lock, const Manifest& manifest,
                           const DebloatPlan& plan,
                           bool allow_shadow_fallback = false);

// apply_full, but offending removal targets are restored (dropped from the
// removal set) until the plan applies cleanly. `dropped` receives the
// restored install paths.
TransformResult apply_full_with_closure(const Lockfile& lock,
                                        const Manifest& manifest,
                                        DebloatPlan plan,
                                        bool allow_shadow_fallback,
                                        std::set<std::string>* dropped);

// Staging for direct-only validation: the manifest loses the planned names
// and the lockfile is pruned to the instances still reachable without them
// (dev instances kept), so a strict clean install realizes the cascade.
TransformResult stage_direct(const Lockfile& lock, const Manifest& manifest,
                             const DebloatPlan& plan,
                             std::set<std::string>* dropped = nullptr);

}  // namespace depprune
