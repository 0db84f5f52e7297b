#pragma once

#include "depprune/json_util.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace depprune {

enum class DepScope { runtime, dev };

enum class EdgeKind { required, peer, optional };

struct DepEdge {
  std::string name;
  std::string range;
  EdgeKind kind = EdgeKind::required;
};

// One installed copy of a dependency. The same name/version may occur at
// several install paths; each counts separately.
struct DependencyInstance {
  std::string install_path;
  std::string name;
  std::string version;
  DepScope scope = DepScope::runtime;
  bool is_direct = false;
  bool bundled = false;
  std::vector<DepEdge> declared_deps;
};

// package-lock.json (lockfileVersion 2 or 3) modeled as a dependency
// multigraph over installed instances. The raw ordered document is kept as
// the serialization source of truth; instances are a derived index.
class Lockfile {
 public:
  static Lockfile parse(const std::string& text);
  static Lockfile from_document(ojson doc);

  std::string serialize() const;

  int lockfile_version() const noexcept { return lockfile_version_; }
  const std::string& root_name() const noexcept { return root_name_; }

  const std::vector<DependencyInstance>& instances() const noexcept {
    return instances_;
  }
  const DependencyInstance* find(const std::string& install_path) const;

  std::vector<std::pair<std::string, std::string>> root_runtime_deps() const;
  std::vector<std::pair<std::string, std::string>> root_dev_deps() const;
  bool root_declares_dev(const std::string& dep_name) const;

  std::set<std::string> runtime_instances() const;
  std::set<std::string> dev_instances() const;

  // Node resolution walk: probe from_install_path's own node_modules, then
  // each ancestor's, up to the package root; first hit wins. "" resolves
  // from the root. Returns the winning install path.
  std::optional<std::string> resolve(const std::string& from_install_path,
                                     const std::string& dep_name) const;

  // Runtime instances reachable from the root once `excluded_direct` names
  // are dropped from the root's runtime declarations. Dev instances are
  // never visited. Throws UnresolvableDependency if a visited instance's
  // required edge resolves nowhere; absent peer/optional edges are skipped.
  std::set<std::string> reachable_instances(
      const std::set<std::string>& excluded_direct) const;

  // Runtime instances unreachable with no exclusions. Present in real
  // lockfiles; modeled and reported, never treated as accessed.
  std::set<std::string> orphan_instances() const;

  const ojson& document() const noexcept { return doc_; }
  ojson& mutable_document() noexcept { return doc_; }

  bool operator==(const Lockfile& other) const { return doc_ == other.doc_; }

 private:
  Lockfile() = default;
  void build_index();

  ojson doc_;
  int lockfile_version_ = 0;
  std::string root_name_;
  std::vector<DependencyInstance> instances_;
  std::map<std::string, std::size_t> by_path_;
};

}  // namespace depprune
