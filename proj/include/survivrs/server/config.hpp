// Copyright 2026 The SURVIVRS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURVIVRS_SERVER_CONFIG_HPP
#define SURVIVRS_SERVER_CONFIG_HPP

// Service configuration. File format: one `key = value` per line, `#` starts
// a comment, blank lines ignored. Keys:
//
//   bind               listen address            (default 127.0.0.1)
//   port               TCP port, 0 = ephemeral   (default 8765)
//   recordings_dir     where .svrs files go      (default recordings)
//   ring_capacity      relay frames per stream   (default 64)
//   max_payload_bytes  per frame, <= 8 MiB       (default 8388608)
//   proto_version      signaling version         (default 1)
//   log_level          trace|debug|info|warn|error|off (default info)

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "survivrs/core/frame.hpp"
#include "survivrs/core/types.hpp"

namespace survivrs::server {

inline constexpr const char* kConfigEnvVar = "SURVIVRS_CONFIG";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServerConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8765;
  std::filesystem::path recordings_dir = "recordings";
  std::size_t ring_capacity = 64;
  std::size_t max_payload_bytes = kMaxPayloadBytes;
  std::uint32_t proto_version = kProtoVersion;
  std::string log_level = "info";
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v,
                                std::uint64_t max) {
  std::size_t n = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &n);
  } catch (const std::exception&) {
    n = 0;
  }
  if (n == 0 || n != v.size() || v[0] == '-' || x > max) {
    throw ConfigError(key + ": not an integer in range: '" + v + "'");
  }
  return x;
}

inline bool valid_log_level(const std::string& l) {
  for (const char* k : {"trace", "debug", "info", "warn", "error", "off"}) {
    if (l == k) return true;
  }
  return false;
}

}  // namespace detail

/// Sets one key; throws ConfigError on an unknown key or bad value.
inline void set_config_value(ServerConfig& c, const std::string& key, const std::string& value) {
  if (key == "bind") {
    c.bind = value;
  } else if (key == "port") {
    c.port = static_cast<std::uint16_t>(detail::parse_uint(key, value, 65535));
  } else if (key == "recordings_dir") {
    c.recordings_dir = value;
  } else if (key == "ring_capacity") {
    c.ring_capacity = detail::parse_uint(key, value, 1u << 20);
  } else if (key == "max_payload_bytes") {
    c.max_payload_bytes = detail::parse_uint(key, value, kMaxPayloadBytes);
  } else if (key == "proto_version") {
    c.proto_version = static_cast<std::uint32_t>(detail::parse_uint(key, value, 0xFFFFFFFFu));
  } else if (key == "log_level") {
    if (!detail::valid_log_level(value)) throw ConfigError("log_level: unknown level '" + value + "'");
    c.log_level = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                           const std::string& origin) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline void apply_config_file(ServerConfig& c, const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open config file " + p.string());
  for (const auto& [k, v] : parse_key_values(in, p.string())) set_config_value(c, k, v);
}

/// Defaults, then the file named by SURVIVRS_CONFIG if set.
inline ServerConfig load_config_from_env() {
  ServerConfig c;
  if (const char* p = std::getenv(kConfigEnvVar); p && *p) apply_config_file(c, p);
  return c;
}

/// Startup checks; creates the recordings directory if missing.
inline void validate(const ServerConfig& c) {
  if (c.ring_capacity == 0) throw ConfigError("ring_capacity must be positive");
  if (c.max_payload_bytes == 0) throw ConfigError("max_payload_bytes must be positive");
  if (c.max_payload_bytes > kMaxPayloadBytes) throw ConfigError("max_payload_bytes exceeds 8 MiB");
  if (c.proto_version == 0) throw ConfigError("proto_version must be positive");
  std::error_code ec;
  std::filesystem::create_directories(c.recordings_dir, ec);
  if (ec) throw ConfigError("recordings_dir " + c.recordings_dir.string() + ": " + ec.message());
  auto probe = c.recordings_dir / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("recordings_dir " + c.recordings_dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace survivrs::server

#endif  // SURVIVRS_SERVER_CONFIG_HPP
