#pragma once

#include <string>
#include <vector>

namespace depprune::paths {

std::vector<std::string> split(const std::string& path);
std::string join(const std::vector<std::string>& components, bool absolute);

// Purely textual normalization: collapse "//", resolve "." and "..".
// Never touches the filesystem (recorded traces must stay replayable).
std::string lexical_normalize(const std::string& path);

// install paths are package-root-relative, e.g.
// "node_modules/a/node_modules/@scope/b".
bool is_valid_install_path(const std::string& path, std::string* why = nullptr);

// Last path component(s) naming the installed dependency; a component
// starting with "@" consumes two ("@scope/name"). Throws BadInstallPath.
std::string name_from_install_path(const std::string& install_path);

// Parent instance chain, nearest first, ending with "" (the package root).
// "node_modules/a/node_modules/b" -> {"node_modules/a", ""}.
std::vector<std::string> ancestor_install_paths(const std::string& install_path);

// Where the node resolver would look for `dep_name` inside `base_instance`
// ("" = package root): base + "/node_modules/" + dep_name.
std::string resolve_probe(const std::string& base_instance,
                          const std::string& dep_name);

struct ModuleMapping {
  std::string install_path;
  std::string name;
};

// Maps a module file path (relative to the package root) to the install path
// of the owning dependency: the prefix ending at the last node_modules
// segment plus the dependency directory. Throws MalformedModulePath.
ModuleMapping map_module_path(const std::string& relative_module_path);

}  // namespace depprune::paths
