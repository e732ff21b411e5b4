#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phonespam {

enum class ErrorCode {
  io_error,
  invalid_config,
  unknown_account,
  unknown_campaign,
  unknown_run,
  empty_cluster,
  insufficient_posts,
  degenerate_variance,
  length_mismatch,
  missing_actor_data,
  missing_audience_data,
  invalid_spec,
  id_mismatch,
  stale_run,
  port_in_use,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::unknown_account: return "unknown_account";
    case ErrorCode::unknown_campaign: return "unknown_campaign";
    case ErrorCode::unknown_run: return "unknown_run";
    case ErrorCode::empty_cluster: return "empty_cluster";
    case ErrorCode::insufficient_posts: return "insufficient_posts";
    case ErrorCode::degenerate_variance: return "degenerate_variance";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::missing_actor_data: return "missing_actor_data";
    case ErrorCode::missing_audience_data: return "missing_audience_data";
    case ErrorCode::invalid_spec: return "invalid_spec";
    case ErrorCode::id_mismatch: return "id_mismatch";
    case ErrorCode::stale_run: return "stale_run";
    case ErrorCode::port_in_use: return "port_in_use";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Platforms, in the fixed order used for tie-breaking and table layout.
enum class Platform : std::uint8_t { TW = 0, FB = 1, GP = 2, YT = 3, FL = 4 };

inline constexpr std::array<Platform, 5> kAllPlatforms = {Platform::TW, Platform::FB, Platform::GP,
                                                         Platform::YT, Platform::FL};

inline const char* to_string(Platform p) {
  switch (p) {
    case Platform::TW: return "TW";
    case Platform::FB: return "FB";
    case Platform::GP: return "GP";
    case Platform::YT: return "YT";
    case Platform::FL: return "FL";
  }
  return "??";
}

inline std::optional<Platform> parse_platform(std::string_view s) {
  for (auto p : kAllPlatforms)
    if (s == to_string(p)) return p;
  return std::nullopt;
}

inline std::size_t index_of(Platform p) { return static_cast<std::size_t>(p); }

template <typename T>
using PerPlatform = std::array<T, kAllPlatforms.size()>;

using Timestamp = std::int64_t;  // UTC seconds

struct AccountKey {
  Platform platform{Platform::TW};
  std::string user_id;

  friend auto operator<=>(const AccountKey&, const AccountKey&) = default;
  friend bool operator==(const AccountKey&, const AccountKey&) = default;
};

struct PostKey {
  Platform platform{Platform::TW};
  std::string post_id;

  friend auto operator<=>(const PostKey&, const PostKey&) = default;
  friend bool operator==(const PostKey&, const PostKey&) = default;
};

inline std::string to_string(const PostKey& k) { return std::string(to_string(k.platform)) + ":" + k.post_id; }
inline std::string to_string(const AccountKey& k) { return std::string(to_string(k.platform)) + ":" + k.user_id; }

// FNV-1a, 64 bit. Used for stable identifiers, never for security.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Lines of a text file with "#" comments and blank lines removed, trimmed.
inline std::vector<std::string> read_list_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// Deterministic generator helpers. Distributions from <random> are
// implementation-defined, these are not.
inline std::size_t uniform_index(std::uint64_t bits, std::size_t n) { return static_cast<std::size_t>(bits % n); }
inline double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace phonespam
