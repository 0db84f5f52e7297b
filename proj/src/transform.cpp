#include "depprune/transform.hpp"

#include "depprune/errors.hpp"
#include "depprune/paths.hpp"

#include <algorithm>

namespace depprune {

DebloatPlan make_plan(const BloatReport& report, DebloatStrategy strategy) {
  DebloatPlan plan;
  plan.strategy = strategy;
  plan.remove_direct = report.direct_bloated;
  if (strategy == DebloatStrategy::full_scale) {
    plan.remove_instances = report.unaccessed;
  }
  return plan;
}

Manifest apply_direct(const Manifest& manifest, const DebloatPlan& plan) {
  Manifest out = manifest;
  for (const auto& name : plan.remove_direct) {
    out.remove_runtime_dep(name);
  }
  return out;
}

namespace {

// Resolution against an explicit instance-path universe, so the same probe
// order can be asked about the pre- and post-removal trees.
std::optional<std::string> resolve_in(const std::set<std::string>& universe,
                                      const std::string& from,
                                      const std::string& dep_name) {
  std::string probe = paths::resolve_probe(from, dep_name);
  if (universe.count(probe)) return probe;
  if (from.empty()) return std::nullopt;
  for (const auto& ancestor : paths::ancestor_install_paths(from)) {
    probe = paths::resolve_probe(ancestor, dep_name);
    if (universe.count(probe)) return probe;
  }
  return std::nullopt;
}

const char* edge_field(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::required: return "dependencies";
    case EdgeKind::peer: return "peerDependencies";
    case EdgeKind::optional: return "optionalDependencies";
  }
  return "dependencies";
}

void erase_ref(ojson& entry, EdgeKind kind, const std::string& dep_name) {
  const char* field = edge_field(kind);
  if (entry.contains(field) && entry.at(field).is_object()) {
    entry.at(field).erase(dep_name);
  }
}

}  // namespace

TransformResult apply_full(const Lockfile& lock, const Manifest& manifest,
                           const DebloatPlan& plan,
                           bool allow_shadow_fallback) {
  std::set<std::string> pre_universe;
  for (const auto& inst : lock.instances()) {
    pre_universe.insert(inst.install_path);
  }

  // Already-absent paths count as removed; applying a plan twice is a no-op.
  std::set<std::string> removed;
  std::set_intersection(plan.remove_instances.begin(),
                        plan.remove_instances.end(), pre_universe.begin(),
                        pre_universe.end(),
                        std::inserter(removed, removed.end()));

  std::set<std::string> post_universe;
  std::set_difference(pre_universe.begin(), pre_universe.end(),
                      removed.begin(), removed.end(),
                      std::inserter(post_universe, post_universe.end()));

  ojson lock_doc = lock.document();
  ojson manifest_doc = manifest.document();
  ojson& packages = lock_doc.at("packages");
  std::vector<SurvivorBreak> breaks;
  std::vector<std::string> warnings;

  // Surviving instances: drop references whose sole resolution disappeared;
  // flag references that would fall back to an ancestor copy.
  for (const auto& inst : lock.instances()) {
    if (removed.count(inst.install_path)) continue;
    for (const auto& edge : inst.declared_deps) {
      auto pre = resolve_in(pre_universe, inst.install_path, edge.name);
      if (!pre || !removed.count(*pre)) continue;
      auto post = resolve_in(post_universe, inst.install_path, edge.name);
      if (!post) {
        erase_ref(packages.at(inst.install_path), edge.kind, edge.name);
      } else if (!allow_shadow_fallback) {
        breaks.push_back({inst.install_path, edge.name, *pre});
      }
    }
  }

  // Root entry: runtime declarations clean up like survivor references
  // (there is no ancestor to fall back to above the root); a dev declaration
  // losing its instance would desync package.json (whose dev section is
  // contractually untouched) from the lockfile.
  if (packages.contains("")) {
    ojson& root = packages.at("");
    for (const auto& [dep, range] : lock.root_runtime_deps()) {
      (void)range;
      auto pre = resolve_in(pre_universe, "", dep);
      if (!pre || !removed.count(*pre)) continue;
      erase_ref(root, EdgeKind::required, dep);
      if (manifest_doc.contains("dependencies") &&
          manifest_doc.at("dependencies").is_object()) {
        manifest_doc.at("dependencies").erase(dep);
      }
    }
    for (const auto& [dep, range] : lock.root_dev_deps()) {
      (void)range;
      auto pre = resolve_in(pre_universe, "", dep);
      if (pre && removed.count(*pre)) {
        breaks.push_back({"", dep, *pre});
      }
    }
  }

  if (!breaks.empty()) throw RemovalBreaksSurvivor(std::move(breaks));

  for (const auto& path : removed) {
    packages.erase(path);
  }

  // v2 files carry a legacy nested "dependencies" tree alongside the
  // packages map; rewriting it is out of scope, so a modified lockfile
  // drops it rather than shipping a stale copy.
  if (!removed.empty() && lock_doc.contains("dependencies")) {
    lock_doc.erase("dependencies");
    warnings.push_back(
        "legacy lockfile \"dependencies\" section dropped from the rewritten "
        "file; npm regenerates it on the next install");
  }

  TransformResult result{Lockfile::from_document(std::move(lock_doc)),
                         Manifest::from_document(std::move(manifest_doc)),
                         std::move(warnings)};
  return result;
}

TransformResult apply_full_with_closure(const Lockfile& lock,
                                        const Manifest& manifest,
                                        DebloatPlan plan,
                                        bool allow_shadow_fallback,
                                        std::set<std::string>* dropped) {
  for (;;) {
    try {
      return apply_full(lock, manifest, plan, allow_shadow_fallback);
    } catch (const RemovalBreaksSurvivor& e) {
      bool progressed = false;
      for (const auto& b : e.breaks()) {
        if (plan.remove_instances.erase(b.removed_target)) {
          if (dropped) dropped->insert(b.removed_target);
          progressed = true;
        }
      }
      if (!progressed) throw;  // offenders not in the plan: inconsistent input
    }
  }
}

TransformResult stage_direct(const Lockfile& lock, const Manifest& manifest,
                             const DebloatPlan& plan,
                             std::set<std::string>* dropped) {
  const auto keep = lock.reachable_instances(plan.remove_direct);
  DebloatPlan realized;
  realized.strategy = DebloatStrategy::full_scale;
  realized.remove_direct = plan.remove_direct;
  for (const auto& path : lock.runtime_instances()) {
    if (!keep.count(path)) realized.remove_instances.insert(path);
  }
  auto result = apply_full_with_closure(lock, manifest, realized,
                                        /*allow_shadow_fallback=*/false,
                                        dropped);
  return result;
}

}  // namespace depprune
