#pragma once

#include "depprune/json_util.hpp"

#include <string>
#include <utility>
#include <vector>

namespace depprune {

// package.json model. The parsed document is kept whole (ordered), so every
// field the tool does not understand rides through serialization verbatim
// and removals show up as minimal diffs.
class Manifest {
 public:
  static Manifest parse(const std::string& text);
  static Manifest from_document(ojson doc);

  std::string serialize() const;

  const std::string& name() const noexcept { return name_; }

  std::vector<std::pair<std::string, std::string>> runtime_deps() const;
  std::vector<std::pair<std::string, std::string>> dev_deps() const;

  bool has_runtime_dep(const std::string& dep_name) const;

  // Throws UnknownDirectDependency when the name is not declared.
  void remove_runtime_dep(const std::string& dep_name);

  const ojson& document() const noexcept { return doc_; }

  bool operator==(const Manifest& other) const { return doc_ == other.doc_; }

 private:
  Manifest() = default;

  ojson doc_;
  std::string name_;
};

}  // namespace depprune
