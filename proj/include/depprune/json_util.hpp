#pragma once

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace depprune {

// All documents are held as insertion-ordered JSON so that rewritten
// package.json / package-lock.json files diff cleanly against their inputs.
using ojson = nlohmann::ordered_json;

struct DuplicateKeySite {
  std::string object_path;  // JSON-pointer-like path of the enclosing object
  std::string key;
};

// Parses `text`, throwing MalformedDocument with 1-based line/column on error.
// `what` names the document in the error message ("package.json", ...).
ojson parse_document(const std::string& text, const std::string& what);

// Scans well-formed JSON text for objects containing the same key twice.
// DOM parsing silently collapses duplicates, so this runs over the raw text.
std::vector<DuplicateKeySite> duplicate_object_keys(const std::string& text);

// 2-space indentation, UTF-8 passthrough, trailing newline: the npm on-disk
// convention, so an unmodified parse/serialize round trip diffs clean.
std::string dump_document(const ojson& doc);

std::pair<int, int> offset_to_line_col(const std::string& text,
                                       std::size_t byte_offset);

}  // namespace depprune
