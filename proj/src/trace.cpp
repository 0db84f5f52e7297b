#include "depprune/trace.hpp"

#include "depprune/errors.hpp"
#include "depprune/lockfile.hpp"

#include <cctype>
#include <istream>

namespace depprune {

namespace {

constexpr const char* kUnfinished = "<unfinished ...>";

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::size_t skip_spaces(const std::string& s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

// Parses a leading decimal pid ("1234  openat(..."). Tracer logs written
// with child-following always carry one; without it the pid defaults to 0.
std::size_t parse_pid(const std::string& s, long* pid) {
  std::size_t i = 0;
  long value = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    value = value * 10 + (s[i] - '0');
    ++i;
  }
  if (i == 0 || i >= s.size() || (s[i] != ' ' && s[i] != '\t')) {
    *pid = 0;
    return 0;
  }
  *pid = value;
  return skip_spaces(s, i);
}

// Extracts the first quoted string argument, handling tracer escapes
// (\" \\ \n \t \r, octal, \xHH). Single quotes are accepted as well.
bool extract_quoted(const std::string& s, std::size_t from, std::string* out,
                    std::size_t* end) {
  std::size_t i = s.find_first_of("\"'", from);
  if (i == std::string::npos) return false;
  const char quote = s[i];
  ++i;
  std::string value;
  while (i < s.size() && s[i] != quote) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      char esc = s[i + 1];
      i += 2;
      switch (esc) {
        case 'n': value += '\n'; break;
        case 't': value += '\t'; break;
        case 'r': value += '\r'; break;
        case '\\': value += '\\'; break;
        case '\'': value += '\''; break;
        case '"': value += '"'; break;
        case 'x': {
          int v = 0, digits = 0;
          while (i < s.size() && digits < 2 &&
                 std::isxdigit(static_cast<unsigned char>(s[i]))) {
            char h = s[i];
            v = v * 16 + (h <= '9' ? h - '0' : (h | 0x20) - 'a' + 10);
            ++i;
            ++digits;
          }
          value += static_cast<char>(v);
          break;
        }
        default:
          if (esc >= '0' && esc <= '7') {
            int v = esc - '0', digits = 1;
            while (i < s.size() && digits < 3 && s[i] >= '0' && s[i] <= '7') {
              v = v * 8 + (s[i] - '0');
              ++i;
              ++digits;
            }
            value += static_cast<char>(v);
          } else {
            value += esc;
          }
      }
      continue;
    }
    value += c;
    ++i;
  }
  if (i >= s.size()) return false;  // unterminated
  *out = std::move(value);
  if (end) *end = i + 1;
  return true;
}

// Parses the " = <decimal>[ ERRNO (text)]" tail. " = ?" has no usable
// result (exits, detached calls) and is rejected.
bool parse_result(const std::string& s, long long* result,
                  std::string* errno_tag) {
  std::size_t eq = s.rfind(" = ");
  if (eq == std::string::npos) return false;
  std::size_t i = eq + 3;
  i = skip_spaces(s, i);
  if (i >= s.size()) return false;
  bool negative = false;
  if (s[i] == '-') {
    negative = true;
    ++i;
  }
  if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) {
    return false;
  }
  long long value = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    value = value * 10 + (s[i] - '0');
    ++i;
  }
  *result = negative ? -value : value;
  errno_tag->clear();
  i = skip_spaces(s, i);
  std::size_t tag_start = i;
  while (i < s.size() && (std::isupper(static_cast<unsigned char>(s[i])) ||
                          std::isdigit(static_cast<unsigned char>(s[i])))) {
    ++i;
  }
  if (i > tag_start) *errno_tag = s.substr(tag_start, i - tag_start);
  return true;
}

std::string syscall_of(const std::string& body) {
  std::size_t i = 0;
  while (i < body.size() &&
         (std::isalnum(static_cast<unsigned char>(body[i])) || body[i] == '_')) {
    ++i;
  }
  if (i == 0 || i >= body.size() || body[i] != '(') return {};
  return body.substr(0, i);
}

}  // namespace

TraceOptions TraceOptions::with_stat_family() {
  TraceOptions opts;
  opts.syscalls.insert({"stat", "lstat", "statx", "newfstatat", "fstatat64",
                        "access", "faccessat", "faccessat2"});
  return opts;
}

TraceParser::TraceParser(TraceOptions options) : options_(std::move(options)) {}

std::optional<TraceEvent> TraceParser::parse_complete(long pid,
                                                      const std::string& body) {
  const std::string syscall = syscall_of(body);
  if (syscall.empty()) {
    ++stats_.skipped_malformed;
    return std::nullopt;
  }
  if (!options_.syscalls.count(syscall)) {
    ++stats_.skipped_other_syscall;
    return std::nullopt;
  }
  TraceEvent event;
  event.pid = pid;
  event.syscall = syscall;
  if (!extract_quoted(body, syscall.size(), &event.path, nullptr) ||
      !parse_result(body, &event.result, &event.errno_tag)) {
    ++stats_.skipped_malformed;
    return std::nullopt;
  }
  ++stats_.events;
  return event;
}

std::optional<TraceEvent> TraceParser::feed(const std::string& line) {
  ++stats_.lines;
  long pid = 0;
  std::size_t at = parse_pid(line, &pid);
  std::string body = line.substr(at);
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) {
    body.pop_back();
  }

  if (body.empty()) {
    ++stats_.skipped_malformed;
    return std::nullopt;
  }
  if (starts_with(body, "---")) {  // signal delivery
    ++stats_.skipped_signal;
    return std::nullopt;
  }
  if (starts_with(body, "+++")) {  // process exit / kill
    ++stats_.skipped_exit;
    return std::nullopt;
  }

  // "openat(AT_FDCWD, "/x", O_RDONLY <unfinished ...>"
  if (body.size() >= std::char_traits<char>::length(kUnfinished) &&
      body.compare(body.size() - std::char_traits<char>::length(kUnfinished),
                   std::string::npos, kUnfinished) == 0) {
    std::string fragment =
        body.substr(0, body.size() - std::char_traits<char>::length(kUnfinished));
    const std::string syscall = syscall_of(fragment);
    if (syscall.empty()) {
      ++stats_.skipped_unjoinable;
      return std::nullopt;
    }
    auto key = std::make_pair(pid, syscall);
    if (pending_.count(key)) ++stats_.skipped_unjoinable;  // overwritten
    pending_[key] = std::move(fragment);
    return std::nullopt;
  }

  // "<... openat resumed>) = 3"
  if (starts_with(body, "<... ")) {
    std::size_t name_start = 5;
    std::size_t name_end = body.find(' ', name_start);
    if (name_end == std::string::npos ||
        body.compare(name_end, 9, " resumed>") != 0) {
      ++stats_.skipped_unjoinable;
      return std::nullopt;
    }
    const std::string syscall = body.substr(name_start, name_end - name_start);
    auto it = pending_.find(std::make_pair(pid, syscall));
    if (it == pending_.end()) {
      ++stats_.skipped_unjoinable;
      return std::nullopt;
    }
    std::string joined = it->second + body.substr(name_end + 9);
    pending_.erase(it);
    ++stats_.joined;
    return parse_complete(pid, joined);
  }

  return parse_complete(pid, body);
}

void TraceParser::finish() {
  stats_.skipped_unjoinable += pending_.size();
  pending_.clear();
}

std::optional<TraceEvent> parse_trace_line(const std::string& line) {
  TraceParser parser;
  return parser.feed(line);
}

AccessCollector::AccessCollector(const std::string& package_root_abs,
                                 FilterOptions options)
    : options_(std::move(options)) {
  root_ = paths::lexical_normalize(package_root_abs);
  if (root_ == "/") root_.clear();
  root_prefix_ = root_ + "/node_modules/";
  root_ += "/";
}

void AccessCollector::add(const TraceEvent& event) {
  if (event.result < 0) return;  // failed probes never count as access
  const std::string path = paths::lexical_normalize(event.path);
  if (path.size() <= root_prefix_.size() ||
      path.compare(0, root_prefix_.size(), root_prefix_) != 0) {
    return;
  }
  std::size_t dot = path.find_last_of("./");
  if (dot == std::string::npos || path[dot] != '.' ||
      !options_.extensions.count(path.substr(dot))) {
    return;
  }
  const std::string relative = path.substr(root_.size());
  try {
    auto mapping = paths::map_module_path(relative);
    access_.module_paths.insert(path);
    access_.instance_paths.insert(mapping.install_path);
  } catch (const MalformedModulePath&) {
    access_.unmapped_paths.insert(path);
  }
}

AccessSet filter_module_accesses(const std::vector<TraceEvent>& events,
                                 const std::string& package_root_abs,
                                 FilterOptions options) {
  AccessCollector collector(package_root_abs, std::move(options));
  for (const auto& event : events) collector.add(event);
  return collector.take();
}

paths::ModuleMapping map_path_to_instance(const std::string& module_path,
                                          const std::string& package_root_abs) {
  std::string root = paths::lexical_normalize(package_root_abs);
  if (root == "/") root.clear();
  const std::string path = paths::lexical_normalize(module_path);
  if (path.size() <= root.size() + 1 ||
      path.compare(0, root.size(), root) != 0 || path[root.size()] != '/') {
    throw MalformedModulePath(module_path, "not under the package root");
  }
  return paths::map_module_path(path.substr(root.size() + 1));
}

AccessedDeps accessed_dependencies(const AccessSet& access,
                                   const Lockfile& lock) {
  AccessedDeps out;
  for (const auto& install_path : access.instance_paths) {
    if (lock.find(install_path)) {
      out.known.insert(install_path);
    } else {
      out.untracked.insert(install_path);
    }
  }
  return out;
}

std::vector<TraceEvent> read_trace_stream(std::istream& in,
                                          TraceParser& parser) {
  std::vector<TraceEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (auto event = parser.feed(line)) events.push_back(std::move(*event));
  }
  parser.finish();
  return events;
}

}  // namespace depprune
