#pragma once

// Report envelope shared by the command-line subcommands.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "ctxkit/io.hpp"

namespace ctxkit::report {

inline constexpr const char* schema_version = "1.0";

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + buf;
}

inline io::Json envelope(const std::string& command, const std::string& input_digest) {
  io::Json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  j["input_digest"] = input_digest;
  return j;
}

namespace detail {
inline void flatten(const io::Json& j, const std::string& path, std::string& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    bool quote = v.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      v = q + "\"";
    }
    out += path + "," + v + "\n";
  }
}
}  // namespace detail

/// One "path,value" row per scalar leaf.
inline std::string to_csv(const io::Json& j) {
  std::string out = "path,value\n";
  detail::flatten(j, "", out);
  return out;
}

}  // namespace ctxkit::report
