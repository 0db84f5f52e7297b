#include "depprune/detect.hpp"

#include "depprune/errors.hpp"
#include "depprune/paths.hpp"

#include <algorithm>

namespace depprune {

double compute_rd(std::size_t dep_r, std::size_t dep_o) {
  if (dep_o == 0) throw ZeroTotal();
  return static_cast<double>(dep_r) / static_cast<double>(dep_o);
}

std::set<std::string> shadow_candidates(const Lockfile& lock,
                                        const std::set<std::string>& accessed) {
  std::set<std::string> out;
  for (const auto& path : accessed) {
    const DependencyInstance* inst = lock.find(path);
    if (!inst || inst->scope != DepScope::runtime) continue;
    const auto ancestors = paths::ancestor_install_paths(path);
    if (ancestors.size() < 2) continue;  // root-level instance
    for (std::size_t i = 1; i < ancestors.size(); ++i) {
      const std::string probe = paths::resolve_probe(ancestors[i], inst->name);
      if (lock.find(probe)) {
        out.insert(path);
        break;
      }
    }
  }
  return out;
}

BloatReport detect(const Lockfile& lock, const std::set<std::string>& accessed) {
  const std::set<std::string> runtime = lock.runtime_instances();

  std::vector<std::string> extras;
  for (const auto& path : accessed) {
    if (!runtime.count(path)) extras.push_back(path);
  }
  if (!extras.empty()) throw AccessOutsideLockfile(std::move(extras));

  BloatReport report;
  report.total_runtime = runtime.size();
  report.accessed = accessed;
  std::set_difference(
      runtime.begin(), runtime.end(), accessed.begin(), accessed.end(),
      std::inserter(report.unaccessed, report.unaccessed.end()));

  std::set<std::string> root_runtime_names;
  for (const auto& [dep, range] : lock.root_runtime_deps()) {
    (void)range;
    root_runtime_names.insert(dep);
  }

  std::set<std::string> direct_paths;  // root-level direct runtime instances
  for (const auto& path : runtime) {
    const DependencyInstance* inst = lock.find(path);
    if (inst->is_direct) direct_paths.insert(path);
  }

  for (const auto& path : report.unaccessed) {
    const DependencyInstance* inst = lock.find(path);
    // Direct bloat must be removable from the manifest's runtime section;
    // root-level instances declared only under devDependencies cascade like
    // indirect ones instead.
    if (inst->is_direct && root_runtime_names.count(inst->name)) {
      report.direct_bloated.insert(inst->name);
    } else {
      report.indirect_bloated.insert(path);
    }
  }

  const auto still_reachable = lock.reachable_instances(report.direct_bloated);
  for (const auto& path : runtime) {
    if (!still_reachable.count(path) && !direct_paths.count(path)) {
      report.cascade_from_direct.insert(path);
    }
  }

  report.shadow_candidates = shadow_candidates(lock, accessed);
  report.orphans = lock.orphan_instances();
  report.r_d = runtime.empty()
                   ? 0.0
                   : compute_rd(report.unaccessed.size(), runtime.size());
  return report;
}

}  // namespace depprune
