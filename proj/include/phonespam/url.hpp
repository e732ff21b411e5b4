#pragma once

// Host extraction, registrable-domain computation against a bundled public
// suffix snapshot, and the static host tables (platform hosts, shorteners).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phonespam/common.hpp"

namespace phonespam {

// "https://user@Sub.Example.com:8080/path?q" -> "sub.example.com"
inline std::string url_host(std::string_view url) {
  auto u = trim(url);
  if (auto p = u.find("://"); p != std::string_view::npos) u.remove_prefix(p + 3);
  else if (starts_with(u, "//")) u.remove_prefix(2);
  const auto end = u.find_first_of("/?#");
  if (end != std::string_view::npos) u = u.substr(0, end);
  if (auto at = u.rfind('@'); at != std::string_view::npos) u.remove_prefix(at + 1);
  if (auto colon = u.rfind(':'); colon != std::string_view::npos) u = u.substr(0, colon);
  while (!u.empty() && u.back() == '.') u.remove_suffix(1);
  return to_lower(u);
}

// Host and each parent domain with at least two labels, most specific first.
inline std::vector<std::string> host_and_parents(std::string_view host) {
  std::vector<std::string> out;
  std::string_view h = host;
  while (h.find('.') != std::string_view::npos) {
    out.emplace_back(h);
    h.remove_prefix(h.find('.') + 1);
  }
  return out;
}

inline const std::set<std::string, std::less<>>& bundled_public_suffixes() {
  static const std::set<std::string, std::less<>> s = {
      "com",    "net",    "org",    "info",   "biz",    "edu",    "gov",    "mil",    "int",    "co",     "io",
      "me",     "ly",     "gl",     "kr",     "be",     "us",     "uk",     "ca",     "de",     "fr",     "es",
      "it",     "nl",     "ru",     "cn",     "jp",     "in",     "id",     "ae",     "au",     "br",     "mx",
      "ar",     "cl",     "ve",     "pk",     "ng",     "gh",     "kw",     "gt",     "tv",     "cc",     "ws",
      "xyz",    "online", "site",   "club",   "top",    "shop",   "store",  "live",   "app",    "blog",   "ph",
      "my",     "sg",     "za",     "sa",     "eg",     "tk",     "ml",     "ga",     "cf",     "gq",     "pw",
      "co.uk",  "org.uk", "ac.uk",  "gov.uk", "me.uk",  "ltd.uk", "plc.uk", "co.id",  "or.id",  "web.id", "ac.id",
      "go.id",  "my.id",  "sch.id", "co.in",  "net.in", "org.in", "firm.in", "gen.in", "ind.in", "ac.in", "gov.in",
      "com.au", "net.au", "org.au", "co.ae",  "net.ae", "org.ae", "com.br", "com.mx", "com.ar", "com.pk", "com.ng",
      "com.gh", "com.kw", "com.gt", "com.ve", "co.ve",  "com.co", "com.sg", "com.my", "com.ph", "co.za",  "com.sa",
      "com.eg", "co.jp",  "ne.jp",  "or.jp",  "com.cn", "net.cn", "blogspot.com", "github.io", "herokuapp.com"};
  return s;
}

// Registrable domain (public suffix + one label). Hosts that are themselves a
// public suffix, or IP literals, are returned unchanged.
inline std::string registrable_domain(std::string_view host,
                                      const std::set<std::string, std::less<>>& suffixes = bundled_public_suffixes()) {
  const std::string h = to_lower(host);
  if (h.empty()) return h;
  if (std::all_of(h.begin(), h.end(), [](char c) { return is_ascii_digit(c) || c == '.'; })) return h;
  std::vector<std::size_t> dots;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] == '.') dots.push_back(i);
  // Candidate suffixes from longest to shortest.
  for (std::size_t k = 0; k < dots.size(); ++k) {
    const std::string_view suffix = std::string_view(h).substr(dots[k] + 1);
    if (suffixes.count(suffix) > 0) return k == 0 ? h : h.substr(dots[k - 1] + 1);
  }
  // Unknown TLD: last two labels.
  if (dots.size() >= 2) return h.substr(dots[dots.size() - 2] + 1);
  return h;
}

// Host suffix -> platform for cross-reference detection.
using OsnDomainMap = std::map<std::string, Platform, std::less<>>;

inline const OsnDomainMap& default_osn_domains() {
  static const OsnDomainMap m = {
      {"twitter.com", Platform::TW},  {"facebook.com", Platform::FB}, {"fb.me", Platform::FB},
      {"fb.com", Platform::FB},       {"plus.google.com", Platform::GP}, {"youtube.com", Platform::YT},
      {"youtu.be", Platform::YT},     {"flickr.com", Platform::FL},   {"flic.kr", Platform::FL},
  };
  return m;
}

inline std::optional<Platform> platform_for_host(std::string_view host, const OsnDomainMap& map) {
  for (const auto& h : host_and_parents(host)) {
    auto it = map.find(h);
    if (it != map.end()) return it->second;
  }
  return std::nullopt;
}

inline const std::set<std::string, std::less<>>& default_shorteners() {
  static const std::set<std::string, std::less<>> s = {"bit.ly", "t.co",    "goo.gl", "tinyurl.com",
                                                       "fb.me",  "flic.kr", "youtu.be"};
  return s;
}

inline bool host_in(std::string_view host, const std::set<std::string, std::less<>>& hosts) {
  for (const auto& h : host_and_parents(host))
    if (hosts.count(h) > 0) return true;
  return false;
}

}  // namespace phonespam
