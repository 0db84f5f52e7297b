#include "depprune/lockfile.hpp"

#include "depprune/errors.hpp"
#include "depprune/paths.hpp"

#include <deque>

namespace depprune {

namespace {

constexpr const char* kPackages = "packages";

std::vector<std::pair<std::string, std::string>> object_entries(
    const ojson& obj, const char* field) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!obj.is_object() || !obj.contains(field)) return out;
  const ojson& sec = obj.at(field);
  if (!sec.is_object()) {
    throw MalformedDocument(std::string("package-lock.json: \"") + field +
                            "\" must be an object");
  }
  for (const auto& [dep, range] : sec.items()) {
    out.emplace_back(dep, range.is_string() ? range.get<std::string>() : "");
  }
  return out;
}

bool truthy_flag(const ojson& entry, const char* field) {
  return entry.is_object() && entry.contains(field) &&
         entry.at(field).is_boolean() && entry.at(field).get<bool>();
}

void append_edges(const ojson& entry, const char* field, EdgeKind kind,
                  std::vector<DepEdge>& out) {
  for (auto& [dep, range] : object_entries(entry, field)) {
    out.push_back({dep, range, kind});
  }
}

}  // namespace

Lockfile Lockfile::parse(const std::string& text) {
  return from_document(parse_document(text, "package-lock.json"));
}

Lockfile Lockfile::from_document(ojson doc) {
  if (!doc.is_object()) {
    throw MalformedDocument(
        "package-lock.json: top-level value must be an object");
  }
  int version = 0;
  if (doc.contains("lockfileVersion") &&
      doc.at("lockfileVersion").is_number_integer()) {
    version = doc.at("lockfileVersion").get<int>();
  }
  if (version != 2 && version != 3) {
    throw UnsupportedLockfileVersion(
        "lockfileVersion " + std::to_string(version) +
        " is not supported; regenerate the lockfile with npm >= 7 "
        "(versions 2 and 3 carry the \"packages\" map this tool reads)");
  }
  if (!doc.contains(kPackages) || !doc.at(kPackages).is_object()) {
    throw UnsupportedLockfileVersion(
        "lockfile has no \"packages\" map; only lockfileVersion 2/3 layouts "
        "are supported");
  }

  Lockfile lock;
  lock.doc_ = std::move(doc);
  lock.lockfile_version_ = version;
  if (lock.doc_.contains("name") && lock.doc_.at("name").is_string()) {
    lock.root_name_ = lock.doc_.at("name").get<std::string>();
  }
  lock.build_index();
  return lock;
}

void Lockfile::build_index() {
  instances_.clear();
  by_path_.clear();

  const ojson& packages = doc_.at(kPackages);
  std::set<std::string> root_decl_runtime;
  std::set<std::string> root_decl_dev;
  if (packages.contains("")) {
    for (auto& [dep, range] : object_entries(packages.at(""), "dependencies")) {
      (void)range;
      root_decl_runtime.insert(dep);
    }
    for (auto& [dep, range] :
         object_entries(packages.at(""), "devDependencies")) {
      (void)range;
      root_decl_dev.insert(dep);
    }
  }

  for (const auto& [key, entry] : packages.items()) {
    if (key.empty()) continue;  // root entry
    std::string why;
    if (!paths::is_valid_install_path(key, &why)) {
      throw BadInstallPath(key, why);
    }
    DependencyInstance inst;
    inst.install_path = key;
    inst.name = paths::name_from_install_path(key);
    if (entry.is_object() && entry.contains("version") &&
        entry.at("version").is_string()) {
      inst.version = entry.at("version").get<std::string>();
    }
    inst.scope = (truthy_flag(entry, "dev") || truthy_flag(entry, "devOptional"))
                     ? DepScope::dev
                     : DepScope::runtime;
    inst.bundled = truthy_flag(entry, "inBundle");

    std::size_t nm_segments = 0;
    for (const auto& comp : paths::split(key)) {
      if (comp == "node_modules") ++nm_segments;
    }
    inst.is_direct = nm_segments == 1 && (root_decl_runtime.count(inst.name) ||
                                          root_decl_dev.count(inst.name));

    append_edges(entry, "dependencies", EdgeKind::required, inst.declared_deps);
    append_edges(entry, "peerDependencies", EdgeKind::peer, inst.declared_deps);
    append_edges(entry, "optionalDependencies", EdgeKind::optional,
                 inst.declared_deps);

    by_path_.emplace(inst.install_path, instances_.size());
    instances_.push_back(std::move(inst));
  }
}

std::string Lockfile::serialize() const { return dump_document(doc_); }

const DependencyInstance* Lockfile::find(const std::string& install_path) const {
  auto it = by_path_.find(install_path);
  return it == by_path_.end() ? nullptr : &instances_[it->second];
}

std::vector<std::pair<std::string, std::string>> Lockfile::root_runtime_deps()
    const {
  const ojson& packages = doc_.at(kPackages);
  if (!packages.contains("")) return {};
  return object_entries(packages.at(""), "dependencies");
}

std::vector<std::pair<std::string, std::string>> Lockfile::root_dev_deps()
    const {
  const ojson& packages = doc_.at(kPackages);
  if (!packages.contains("")) return {};
  return object_entries(packages.at(""), "devDependencies");
}

bool Lockfile::root_declares_dev(const std::string& dep_name) const {
  for (const auto& [dep, range] : root_dev_deps()) {
    (void)range;
    if (dep == dep_name) return true;
  }
  return false;
}

std::set<std::string> Lockfile::runtime_instances() const {
  std::set<std::string> out;
  for (const auto& inst : instances_) {
    if (inst.scope == DepScope::runtime) out.insert(inst.install_path);
  }
  return out;
}

std::set<std::string> Lockfile::dev_instances() const {
  std::set<std::string> out;
  for (const auto& inst : instances_) {
    if (inst.scope == DepScope::dev) out.insert(inst.install_path);
  }
  return out;
}

std::optional<std::string> Lockfile::resolve(
    const std::string& from_install_path, const std::string& dep_name) const {
  std::string probe = paths::resolve_probe(from_install_path, dep_name);
  if (by_path_.count(probe)) return probe;
  if (from_install_path.empty()) return std::nullopt;
  for (const auto& ancestor :
       paths::ancestor_install_paths(from_install_path)) {
    probe = paths::resolve_probe(ancestor, dep_name);
    if (by_path_.count(probe)) return probe;
  }
  return std::nullopt;
}

std::set<std::string> Lockfile::reachable_instances(
    const std::set<std::string>& excluded_direct) const {
  std::set<std::string> root_names;
  for (const auto& [dep, range] : root_runtime_deps()) {
    (void)range;
    root_names.insert(dep);
  }
  for (const auto& name : excluded_direct) {
    if (!root_names.count(name)) throw UnknownDirectDependency(name);
  }

  std::set<std::string> visited;
  std::deque<std::string> queue;

  auto enqueue = [&](const std::string& requester, const std::string& name,
                     EdgeKind kind) {
    auto target = resolve(requester, name);
    if (!target) {
      if (kind == EdgeKind::required) {
        throw UnresolvableDependency(requester, name);
      }
      return;  // absent peer/optional: skip silently
    }
    const DependencyInstance* inst = find(*target);
    if (inst->scope == DepScope::dev) return;  // never visit dev instances
    if (visited.insert(*target).second) queue.push_back(*target);
  };

  for (const auto& name : root_names) {
    if (!excluded_direct.count(name)) enqueue("", name, EdgeKind::required);
  }
  while (!queue.empty()) {
    const DependencyInstance* inst = find(queue.front());
    queue.pop_front();
    for (const auto& edge : inst->declared_deps) {
      enqueue(inst->install_path, edge.name, edge.kind);
    }
  }
  return visited;
}

std::set<std::string> Lockfile::orphan_instances() const {
  const auto reachable = reachable_instances({});
  std::set<std::string> out;
  for (const auto& path : runtime_instances()) {
    if (!reachable.count(path)) out.insert(path);
  }
  return out;
}

}  // namespace depprune
