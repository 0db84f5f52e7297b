#include "support/lockgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <deque>

namespace lockgen {

using ojson = nlohmann::ordered_json;

namespace {

// Independent resolution: probe base/node_modules/name, then each ancestor
// obtained by chopping the trailing "/node_modules/<dir>" off the base.
std::string probe(const std::string& base, const std::string& name) {
  return base.empty() ? "node_modules/" + name
                      : base + "/node_modules/" + name;
}

std::vector<std::string> oracle_ancestors(const std::string& path) {
  std::vector<std::string> out;
  std::string cur = path;
  for (;;) {
    const auto pos = cur.rfind("/node_modules/");
    if (pos == std::string::npos) {
      out.push_back("");
      break;
    }
    cur = cur.substr(0, pos);
    out.push_back(cur);
  }
  return out;
}

const GenInstance* oracle_resolve(const GeneratedLockfile& g,
                                  const std::string& from,
                                  const std::string& name) {
  auto it = g.instances.find(probe(from, name));
  if (it != g.instances.end()) return &it->second;
  if (from.empty()) return nullptr;
  for (const auto& ancestor : oracle_ancestors(from)) {
    it = g.instances.find(probe(ancestor, name));
    if (it != g.instances.end()) return &it->second;
  }
  return nullptr;
}

int depth_of(const std::string& path) {
  int depth = 0;
  std::string::size_type at = 0;
  while ((at = path.find("node_modules", at)) != std::string::npos) {
    ++depth;
    at += 12;
  }
  return depth;
}

std::string serialize(const GeneratedLockfile& g) {
  ojson doc;
  doc["name"] = "gen-root";
  doc["version"] = "1.0.0";
  doc["lockfileVersion"] = 3;
  doc["requires"] = true;
  ojson packages;
  ojson root;
  root["name"] = "gen-root";
  root["version"] = "1.0.0";
  if (!g.root_runtime.empty()) {
    ojson deps;
    for (const auto& name : g.root_runtime) deps[name] = "^1.0.0";
    root["dependencies"] = std::move(deps);
  }
  if (!g.root_dev.empty()) {
    ojson deps;
    for (const auto& name : g.root_dev) deps[name] = "^1.0.0";
    root["devDependencies"] = std::move(deps);
  }
  packages[""] = std::move(root);
  for (const auto& [path, inst] : g.instances) {
    ojson entry;
    entry["version"] = inst.version;
    entry["resolved"] =
        "https://registry.invalid/" + inst.name + "/-/" + inst.version + ".tgz";
    if (inst.dev) entry["dev"] = true;
    ojson required, peer, optional;
    for (const auto& [dep, kind] : inst.deps) {
      (kind == 0 ? required : kind == 1 ? peer : optional)[dep] = "^1.0.0";
    }
    if (!required.empty()) entry["dependencies"] = std::move(required);
    if (!peer.empty()) entry["peerDependencies"] = std::move(peer);
    if (!optional.empty()) entry["optionalDependencies"] = std::move(optional);
    packages[path] = std::move(entry);
  }
  doc["packages"] = std::move(packages);
  return doc.dump(2) + "\n";
}

}  // namespace

std::set<std::string> GeneratedLockfile::runtime_paths() const {
  std::set<std::string> out;
  for (const auto& [path, inst] : instances) {
    if (!inst.dev) out.insert(path);
  }
  return out;
}

std::set<std::string> GeneratedLockfile::direct_runtime_paths() const {
  std::set<std::string> out;
  for (const auto& name : root_runtime) {
    const auto path = probe("", name);
    if (instances.count(path)) out.insert(path);
  }
  return out;
}

std::set<std::string> oracle_reachable(
    const GeneratedLockfile& g, const std::set<std::string>& excluded_direct) {
  std::set<std::string> visited;
  std::deque<const GenInstance*> queue;
  auto visit = [&](const GenInstance* inst) {
    if (inst && !inst->dev && visited.insert(inst->install_path).second) {
      queue.push_back(inst);
    }
  };
  for (const auto& name : g.root_runtime) {
    if (!excluded_direct.count(name)) visit(oracle_resolve(g, "", name));
  }
  while (!queue.empty()) {
    const GenInstance* inst = queue.front();
    queue.pop_front();
    for (const auto& [dep, kind] : inst->deps) {
      const GenInstance* target = oracle_resolve(g, inst->install_path, dep);
      assert(target != nullptr || kind != 0);
      visit(target);
    }
  }
  return visited;
}

GeneratedLockfile generate(std::mt19937& rng, const GenOptions& options) {
  GeneratedLockfile g;
  auto chance = [&](double p) {
    return std::uniform_real_distribution<>(0.0, 1.0)(rng) < p;
  };
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<>(lo, hi)(rng);
  };

  // Disjoint name pools keep runtime resolution from ever landing on a
  // dev-marked instance (which real npm trees do not produce either).
  std::vector<std::string> runtime_pool;
  for (int i = 0; i < 40; ++i) runtime_pool.push_back("pkg-" + std::to_string(i));
  if (options.scoped_names) {
    for (int i = 0; i < 8; ++i) {
      runtime_pool.push_back("@gen/scoped-" + std::to_string(i));
    }
  }
  std::vector<std::string> dev_pool;
  for (int i = 0; i < 10; ++i) dev_pool.push_back("dev-" + std::to_string(i));

  auto make_instance = [&](const std::string& path, const std::string& name,
                           bool dev) -> GenInstance& {
    GenInstance inst;
    inst.install_path = path;
    inst.name = name;
    inst.version = std::to_string(pick(1, 3)) + "." + std::to_string(pick(0, 9)) + ".0";
    inst.dev = dev;
    return g.instances.emplace(path, std::move(inst)).first->second;
  };

  const int n_direct = pick(1, 6);
  for (int i = 0; i < n_direct; ++i) {
    const std::string& name = runtime_pool[static_cast<std::size_t>(i)];
    g.root_runtime.push_back(name);
    make_instance(probe("", name), name, false);
  }
  const int n_dev = pick(0, 2);
  for (int i = 0; i < n_dev; ++i) {
    const std::string& name = dev_pool[static_cast<std::size_t>(i)];
    g.root_dev.push_back(name);
    make_instance(probe("", name), name, true);
  }

  const int target = pick(n_direct + n_dev, options.max_instances);
  int guard = options.max_instances * 20;
  while (static_cast<int>(g.instances.size()) < target && guard-- > 0) {
    // Pick a random existing instance to grow from.
    auto it = g.instances.begin();
    std::advance(it, pick(0, static_cast<int>(g.instances.size()) - 1));
    GenInstance& from = it->second;

    const auto& pool = from.dev ? dev_pool : runtime_pool;
    const std::string name = pool[static_cast<std::size_t>(
        pick(0, static_cast<int>(pool.size()) - 1))];
    if (name == from.name) continue;
    bool already = false;
    for (const auto& [dep, kind] : from.deps) {
      (void)kind;
      if (dep == name) already = true;
    }
    if (already) continue;

    const int kind = chance(0.85) ? 0 : chance(0.6) ? 2 : 1;

    if (!oracle_resolve(g, from.install_path, name)) {
      // Materialize the instance: nested under the requester or hoisted.
      const std::string nested = probe(from.install_path, name);
      const std::string hoisted = probe("", name);
      std::string place;
      if (!g.instances.count(hoisted) && chance(0.7)) {
        place = hoisted;
      } else if (depth_of(nested) <= options.max_depth) {
        place = nested;
      } else {
        continue;
      }
      make_instance(place, name, from.dev);
    } else if (kind != 0 && options.ghost_optionals && chance(0.15)) {
      // Absent peer/optional reference: legal, skipped by resolution.
      from.deps.emplace_back("ghost-" + std::to_string(pick(0, 99)), kind);
      continue;
    }
    from.deps.emplace_back(name, kind);

    // Occasionally shadow a hoisted copy with a nested one so ancestor
    // fallback scenarios exist in the tree.
    if (chance(0.08)) {
      const std::string shadow_name = runtime_pool[static_cast<std::size_t>(
          pick(0, static_cast<int>(runtime_pool.size()) - 1))];
      const std::string hoisted = probe("", shadow_name);
      const std::string nested = probe(from.install_path, shadow_name);
      if (!from.dev && g.instances.count(hoisted) && !g.instances.count(nested) &&
          shadow_name != from.name && depth_of(nested) <= options.max_depth) {
        make_instance(nested, shadow_name, false);
        bool has_edge = false;
        for (const auto& [dep, kind2] : from.deps) {
          (void)kind2;
          if (dep == shadow_name) has_edge = true;
        }
        if (!has_edge) from.deps.emplace_back(shadow_name, 0);
      }
    }
  }

  if (options.allow_orphans && chance(0.25)) {
    make_instance(probe("", "orphan-pkg"), "orphan-pkg", false);
  }

  g.text = serialize(g);
  return g;
}

std::set<std::string> random_access_set(std::mt19937& rng,
                                        const GeneratedLockfile& g) {
  std::set<std::string> out;
  std::uniform_real_distribution<> dist(0.0, 1.0);
  const double keep = dist(rng);  // varying density across cases
  for (const auto& path : g.runtime_paths()) {
    if (dist(rng) < keep) out.insert(path);
  }
  return out;
}

std::set<std::string> random_exclusion(std::mt19937& rng,
                                       const GeneratedLockfile& g) {
  std::set<std::string> out;
  std::uniform_real_distribution<> dist(0.0, 1.0);
  for (const auto& name : g.root_runtime) {
    if (dist(rng) < 0.35) out.insert(name);
  }
  return out;
}

GeneratedLockfile exclusive_subtree_shape() {
  GeneratedLockfile g;
  g.root_runtime = {"mega", "leaf"};

  auto add = [&](const std::string& path, const std::string& name) {
    GenInstance inst;
    inst.install_path = path;
    inst.name = name;
    inst.version = "1.0.0";
    g.instances.emplace(path, inst);
  };

  add("node_modules/leaf", "leaf");
  add("node_modules/mega", "mega");
  GenInstance& mega = g.instances.at("node_modules/mega");
  for (int i = 0; i < 679; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "sub-%03d", i);
    const std::string name = buf;
    add("node_modules/" + name, name);
    mega.deps.emplace_back(name, 0);
  }
  g.text = serialize(g);
  return g;
}

}  // namespace lockgen
