#include "depprune/json_util.hpp"

#include "depprune/errors.hpp"

#include <algorithm>
#include <set>

namespace depprune {

std::pair<int, int> offset_to_line_col(const std::string& text,
                                       std::size_t byte_offset) {
  int line = 1;
  int col = 1;
  const std::size_t end = std::min(byte_offset, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ojson parse_document(const std::string& text, const std::string& what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is the 1-based offset of the offending byte.
    auto [line, col] = offset_to_line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw MalformedDocument(what + ": " + e.what(), line, col);
  }
}

namespace {

// SAX walker that records any object key seen twice within one object.
struct DuplicateKeyScanner {
  struct Frame {
    bool is_object = false;
    std::string path;
    std::set<std::string> seen;
  };

  std::vector<Frame> stack;
  std::string pending_key;
  bool key_pending = false;
  std::vector<DuplicateKeySite> found;

  std::string current_path() const {
    return stack.empty() ? std::string() : stack.back().path;
  }

  void value() {
    key_pending = false;  // a scalar consumed the pending key
  }

  bool null() { value(); return true; }
  bool boolean(bool) { value(); return true; }
  bool number_integer(ojson::number_integer_t) { value(); return true; }
  bool number_unsigned(ojson::number_unsigned_t) { value(); return true; }
  bool number_float(ojson::number_float_t, const ojson::string_t&) {
    value();
    return true;
  }
  bool string(ojson::string_t&) { value(); return true; }
  bool binary(ojson::binary_t&) { value(); return true; }

  bool start_object(std::size_t) {
    Frame f;
    f.is_object = true;
    f.path = key_pending ? current_path() + "/" + pending_key : current_path();
    key_pending = false;
    stack.push_back(std::move(f));
    return true;
  }

  bool key(ojson::string_t& k) {
    Frame& f = stack.back();
    if (!f.seen.insert(k).second) {
      found.push_back({f.path, k});
    }
    pending_key = k;
    key_pending = true;
    return true;
  }

  bool end_object() {
    stack.pop_back();
    return true;
  }

  bool start_array(std::size_t) {
    Frame f;
    f.path = key_pending ? current_path() + "/" + pending_key : current_path();
    key_pending = false;
    stack.push_back(std::move(f));
    return true;
  }

  bool end_array() {
    stack.pop_back();
    return true;
  }

  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception&) {
    return false;
  }
};

}  // namespace

std::vector<DuplicateKeySite> duplicate_object_keys(const std::string& text) {
  DuplicateKeyScanner scanner;
  ojson::sax_parse(text, &scanner);
  return scanner.found;
}

std::string dump_document(const ojson& doc) {
  return doc.dump(2) + "\n";
}

}  // namespace depprune
