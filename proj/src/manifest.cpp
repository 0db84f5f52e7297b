#include "depprune/manifest.hpp"

#include "depprune/errors.hpp"

namespace depprune {

namespace {

constexpr const char* kRuntimeSection = "dependencies";
constexpr const char* kDevSection = "devDependencies";

void check_section_shape(const ojson& doc, const char* section) {
  if (!doc.contains(section)) return;
  const ojson& sec = doc.at(section);
  if (!sec.is_object()) {
    throw MalformedDocument(std::string("package.json: \"") + section +
                            "\" must be an object");
  }
  for (const auto& [dep, range] : sec.items()) {
    if (!range.is_string()) {
      throw MalformedDocument(std::string("package.json: \"") + section +
                              "\" entry \"" + dep + "\" must map to a string");
    }
  }
}

std::vector<std::pair<std::string, std::string>> section_entries(
    const ojson& doc, const char* section) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!doc.contains(section)) return out;
  for (const auto& [dep, range] : doc.at(section).items()) {
    out.emplace_back(dep, range.get<std::string>());
  }
  return out;
}

}  // namespace

Manifest Manifest::parse(const std::string& text) {
  ojson doc = parse_document(text, "package.json");
  for (const auto& dup : duplicate_object_keys(text)) {
    if (dup.object_path == std::string("/") + kRuntimeSection ||
        dup.object_path == std::string("/") + kDevSection) {
      throw DuplicateKey("package.json " + dup.object_path, dup.key);
    }
  }
  return from_document(std::move(doc));
}

Manifest Manifest::from_document(ojson doc) {
  if (!doc.is_object()) {
    throw MalformedDocument("package.json: top-level value must be an object");
  }
  check_section_shape(doc, kRuntimeSection);
  check_section_shape(doc, kDevSection);
  Manifest m;
  if (doc.contains("name") && doc.at("name").is_string()) {
    m.name_ = doc.at("name").get<std::string>();
  }
  m.doc_ = std::move(doc);
  return m;
}

std::string Manifest::serialize() const { return dump_document(doc_); }

std::vector<std::pair<std::string, std::string>> Manifest::runtime_deps()
    const {
  return section_entries(doc_, kRuntimeSection);
}

std::vector<std::pair<std::string, std::string>> Manifest::dev_deps() const {
  return section_entries(doc_, kDevSection);
}

bool Manifest::has_runtime_dep(const std::string& dep_name) const {
  return doc_.contains(kRuntimeSection) &&
         doc_.at(kRuntimeSection).contains(dep_name);
}

void Manifest::remove_runtime_dep(const std::string& dep_name) {
  if (!has_runtime_dep(dep_name)) throw UnknownDirectDependency(dep_name);
  doc_.at(kRuntimeSection).erase(dep_name);
}

}  // namespace depprune
