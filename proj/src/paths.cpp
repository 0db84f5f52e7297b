#include "depprune/paths.hpp"

#include "depprune/errors.hpp"

namespace depprune::paths {

namespace {
constexpr const char* kNodeModules = "node_modules";
}

std::vector<std::string> split(const std::string& path) {
  std::vector<std::string> out;
  std::string current;
  for (char c : path) {
    if (c == '/') {
      if (!current.empty()) {
        out.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::string join(const std::vector<std::string>& components, bool absolute) {
  std::string out = absolute ? "/" : "";
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) out += '/';
    out += components[i];
  }
  return out;
}

std::string lexical_normalize(const std::string& path) {
  const bool absolute = !path.empty() && path.front() == '/';
  std::vector<std::string> out;
  for (const auto& comp : split(path)) {
    if (comp == ".") continue;
    if (comp == "..") {
      if (!out.empty() && out.back() != "..") {
        out.pop_back();
      } else if (!absolute) {
        out.push_back(comp);  // leading ".." of a relative path stays
      }
      continue;
    }
    out.push_back(comp);
  }
  std::string joined = join(out, absolute);
  if (joined.empty()) joined = absolute ? "/" : ".";
  return joined;
}

namespace {

// Validates the alternating node_modules/<name>[/node_modules/<name>...]
// shape and returns the component index where the final name starts.
bool walk_install_path(const std::vector<std::string>& comps,
                       std::size_t* final_name_at, std::string* why) {
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (comps.empty()) return fail("empty path");
  std::size_t i = 0;
  std::size_t name_at = 0;
  while (i < comps.size()) {
    if (comps[i] != kNodeModules) {
      return fail("expected node_modules segment at component " +
                  std::to_string(i));
    }
    ++i;
    if (i >= comps.size()) return fail("node_modules is the final component");
    const std::string& head = comps[i];
    if (head == "." || head == ".." || head == kNodeModules) {
      return fail("invalid name component \"" + head + "\"");
    }
    name_at = i;
    if (head.front() == '@') {
      ++i;
      if (i >= comps.size()) {
        return fail("scoped name \"" + head + "\" is missing its second "
                    "component");
      }
      if (comps[i] == "." || comps[i] == ".." || comps[i] == kNodeModules) {
        return fail("invalid scoped name component \"" + comps[i] + "\"");
      }
    }
    ++i;
  }
  if (final_name_at) *final_name_at = name_at;
  return true;
}

}  // namespace

bool is_valid_install_path(const std::string& path, std::string* why) {
  if (!path.empty() && (path.front() == '/' || path.back() == '/')) {
    if (why) *why = "must be a relative path without trailing slash";
    return false;
  }
  if (path.find("//") != std::string::npos) {
    if (why) *why = "contains empty component";
    return false;
  }
  return walk_install_path(split(path), nullptr, why);
}

std::string name_from_install_path(const std::string& install_path) {
  std::string why;
  std::size_t name_at = 0;
  const auto comps = split(install_path);
  if (install_path.empty() || install_path.front() == '/' ||
      install_path.back() == '/' ||
      install_path.find("//") != std::string::npos ||
      !walk_install_path(comps, &name_at, &why)) {
    throw BadInstallPath(install_path, why.empty() ? "invalid shape" : why);
  }
  if (comps[name_at].front() == '@') {
    return comps[name_at] + "/" + comps[name_at + 1];
  }
  return comps[name_at];
}

std::vector<std::string> ancestor_install_paths(
    const std::string& install_path) {
  // Validate first so malformed inputs fail loudly.
  name_from_install_path(install_path);
  auto comps = split(install_path);
  std::vector<std::string> out;
  while (!comps.empty()) {
    // Drop the trailing <name> (one or two components) and its node_modules.
    comps.pop_back();
    if (!comps.empty() && !comps.back().empty() && comps.back().front() == '@') {
      comps.pop_back();
    }
    if (!comps.empty() && comps.back() == kNodeModules) {
      comps.pop_back();
    }
    out.push_back(join(comps, false));
    if (comps.empty()) break;
  }
  return out;
}

std::string resolve_probe(const std::string& base_instance,
                          const std::string& dep_name) {
  if (base_instance.empty()) return std::string(kNodeModules) + "/" + dep_name;
  return base_instance + "/" + kNodeModules + "/" + dep_name;
}

ModuleMapping map_module_path(const std::string& relative_module_path) {
  const auto comps = split(relative_module_path);
  std::size_t last_nm = comps.size();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i] == kNodeModules) last_nm = i;
  }
  if (last_nm == comps.size()) {
    throw MalformedModulePath(relative_module_path,
                              "no node_modules segment");
  }
  std::size_t name_at = last_nm + 1;
  if (name_at >= comps.size()) {
    throw MalformedModulePath(relative_module_path,
                              "node_modules is the final component");
  }
  std::size_t name_end = name_at + 1;  // one past the name components
  std::string name = comps[name_at];
  if (!name.empty() && name.front() == '@') {
    if (name_end >= comps.size()) {
      throw MalformedModulePath(relative_module_path,
                                "scoped package directory is incomplete");
    }
    name += "/" + comps[name_end];
    ++name_end;
  }
  std::vector<std::string> prefix(comps.begin(), comps.begin() + name_end);
  return {join(prefix, false), name};
}

}  // namespace depprune::paths
