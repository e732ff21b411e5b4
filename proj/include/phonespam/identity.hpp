#pragma once

// Spammer identity resolution by name/username similarity, suspension rates
// among matched identities, and the cross-platform savings estimate.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/cluster.hpp"
#include "phonespam/ingest.hpp"
#include "phonespam/metrics.hpp"

namespace phonespam {

// Lowercased (ASCII), trimmed, inner whitespace runs collapsed to one space.
inline std::string normalize_name(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ascii_lower(c));
  }
  return out;
}

// UTF-8 to code points; invalid bytes map to themselves.
inline std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      ok = (c >> 6) == 0x2;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

// Unit-cost Levenshtein distance, two-row DP.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// 1 - distance / max length over normalized code points; 1 means identical.
inline double name_similarity(std::string_view s1, std::string_view s2) {
  const auto a = code_points(normalize_name(s1));
  const auto b = code_points(normalize_name(s2));
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const auto d = edit_distance(a, b);
  return 1.0 - static_cast<double>(d) / static_cast<double>(std::max(a.size(), b.size()));
}

struct IdentityCandidate {
  AccountKey account;
  std::string display_name;
  std::optional<std::string> screen_name;
};

inline IdentityCandidate candidate_from(const Account& a) {
  IdentityCandidate c{a.key(), a.display_name, a.screen_name};
  if (c.screen_name && normalize_name(*c.screen_name).empty()) c.screen_name.reset();
  if (normalize_name(c.display_name).empty()) c.display_name = c.screen_name.value_or(a.user_id);
  return c;
}

struct IdentityEvidence {
  AccountKey a, b;  // a < b
  double score = 0;
  std::string feature;  // "screen_name" or "display_name"
};

struct IdentityCluster {
  std::vector<AccountKey> members;  // ascending, >= 2
  std::vector<Platform> platforms;  // fixed platform order
  std::vector<IdentityEvidence> evidence;
};

struct IdentityMatchResult {
  std::vector<IdentityCluster> clusters;             // ordered by first member
  std::map<std::size_t, std::size_t> by_platform_span;  // platforms spanned -> clusters
  std::size_t within_platform = 0;                   // clusters on one platform
  std::size_t cross_platform = 0;
};

inline nlohmann::json to_json(const IdentityCluster& c) {
  auto members = nlohmann::json::array();
  for (const auto& m : c.members) members.push_back(to_string(m));
  auto platforms = nlohmann::json::array();
  for (auto p : c.platforms) platforms.push_back(to_string(p));
  auto evidence = nlohmann::json::array();
  for (const auto& e : c.evidence)
    evidence.push_back({{"a", to_string(e.a)}, {"b", to_string(e.b)}, {"score", e.score}, {"feature", e.feature}});
  return {{"members", std::move(members)}, {"platforms", std::move(platforms)}, {"evidence", std::move(evidence)}};
}

inline nlohmann::json to_json(const IdentityMatchResult& r) {
  auto clusters = nlohmann::json::array();
  for (const auto& c : r.clusters) clusters.push_back(to_json(c));
  nlohmann::json span = nlohmann::json::object();
  for (const auto& [k, n] : r.by_platform_span) span[std::to_string(k)] = n;
  return {{"clusters", std::move(clusters)},
          {"by_platform_span", std::move(span)},
          {"within_platform", r.within_platform},
          {"cross_platform", r.cross_platform}};
}

// Screen names are compared when both sides have one; otherwise display names.
inline std::pair<double, const char*> identity_score(const IdentityCandidate& x, const IdentityCandidate& y) {
  if (x.screen_name && y.screen_name) return {name_similarity(*x.screen_name, *y.screen_name), "screen_name"};
  return {name_similarity(x.display_name, y.display_name), "display_name"};
}

inline IdentityMatchResult match_identities(std::vector<IdentityCandidate> candidates, const Thresholds& thr) {
  std::sort(candidates.begin(), candidates.end(),
            [](const IdentityCandidate& a, const IdentityCandidate& b) { return a.account < b.account; });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const IdentityCandidate& a, const IdentityCandidate& b) { return a.account == b.account; }),
                   candidates.end());
  const auto n = candidates.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, IdentityEvidence>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto [score, feature] = identity_score(candidates[i], candidates[j]);
      if (score < thr.identity_similarity) continue;
      edges.push_back({{i, j}, {candidates[i].account, candidates[j].account, score, feature}});
      const auto ri = find(i), rj = find(j);
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
  std::map<std::size_t, IdentityCluster> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].members.push_back(candidates[i].account);
  for (auto& [ij, e] : edges) groups[find(ij.first)].evidence.push_back(std::move(e));

  IdentityMatchResult r;
  for (auto& [root, c] : groups) {
    if (c.members.size() < 2) continue;
    for (auto p : kAllPlatforms)
      if (std::any_of(c.members.begin(), c.members.end(), [&](const AccountKey& k) { return k.platform == p; }))
        c.platforms.push_back(p);
    ++r.by_platform_span[c.platforms.size()];
    (c.platforms.size() == 1 ? r.within_platform : r.cross_platform) += 1;
    r.clusters.push_back(std::move(c));
  }
  return r;
}

// Candidates for the authors of one campaign.
inline std::vector<IdentityCandidate> campaign_candidates(const Campaign& c, const Corpus& corpus) {
  std::vector<IdentityCandidate> out;
  for (const auto& k : c.user_ids)
    if (const auto* a = corpus.find_account(k)) out.push_back(candidate_from(*a));
  return out;
}

// ---------------------------------------------------------------------------
// Suspension among homogeneous identities

struct IdentitySuspension {
  PerPlatform<std::size_t> members{};
  PerPlatform<std::size_t> suspended{};
  PerPlatform<std::optional<double>> fraction{};
};

inline nlohmann::json to_json(const IdentitySuspension& s) {
  nlohmann::json j = nlohmann::json::object();
  for (auto p : kAllPlatforms) {
    const auto i = index_of(p);
    j[to_string(p)] = {{"members", s.members[i]}, {"suspended", s.suspended[i]}, {"fraction", opt_json(s.fraction[i])}};
  }
  return j;
}

// Members counted once each, even if they appear in several results.
inline IdentitySuspension identity_suspension_stats(std::span<const IdentityCluster> clusters, const Corpus& corpus) {
  std::set<AccountKey> seen;
  IdentitySuspension s;
  for (const auto& c : clusters)
    for (const auto& m : c.members) {
      if (!seen.insert(m).second) continue;
      const auto i = index_of(m.platform);
      ++s.members[i];
      const auto* a = corpus.find_account(m);
      if (a != nullptr && a->status == AccountStatus::suspended) ++s.suspended[i];
    }
  for (std::size_t i = 0; i < kAllPlatforms.size(); ++i)
    if (s.members[i] > 0) s.fraction[i] = static_cast<double>(s.suspended[i]) / static_cast<double>(s.members[i]);
  return s;
}

// Relative shortfall of platform b against platform a: (f_a - f_b) / f_a.
// 0.60 vs 0.04 gives 0.9333.
inline std::optional<double> suspension_asymmetry(const IdentitySuspension& s, Platform a, Platform b) {
  const auto fa = s.fraction[index_of(a)], fb = s.fraction[index_of(b)];
  if (!fa || !fb || *fa == 0.0) return std::nullopt;
  return (*fa - *fb) / *fa;
}

// ---------------------------------------------------------------------------
// Savings

using Cents = std::int64_t;

inline Cents usd_to_cents(double usd) {
  if (!(usd >= 0.0) || usd > 9.0e13) throw Error(ErrorCode::invalid_config, "amount out of range");
  return static_cast<Cents>(std::llround(usd * 100.0));
}

// "10299896.30"
inline std::string format_cents(Cents c) {
  const bool neg = c < 0;
  const auto a = neg ? -static_cast<unsigned long long>(c) : static_cast<unsigned long long>(c);
  std::string frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (neg ? "-" : "") + std::to_string(a / 100) + "." + frac;
}

struct SavingsEstimate {
  Platform seed_platform{Platform::TW};
  PerPlatform<std::optional<std::int64_t>> audience{};  // included platforms only
  std::int64_t total_victims = 0;
  Cents cost_per_victim_cents = 0;
  Cents total_savings_cents = 0;
  bool lower_bound = true;  // audiences of taken-down accounts are unknown
  std::optional<Cents> reference_cents;
  std::optional<std::string> annotation;

  double total_savings_usd() const { return static_cast<double>(total_savings_cents) / 100.0; }
};

inline nlohmann::json to_json(const SavingsEstimate& s) {
  nlohmann::json audience = nlohmann::json::object();
  for (auto p : kAllPlatforms)
    if (s.audience[index_of(p)]) audience[to_string(p)] = *s.audience[index_of(p)];
  nlohmann::json j{{"seed_platform", to_string(s.seed_platform)},
                   {"audience", std::move(audience)},
                   {"total_victims", s.total_victims},
                   {"cost_per_victim", format_cents(s.cost_per_victim_cents)},
                   {"total_savings", format_cents(s.total_savings_cents)},
                   {"total_savings_cents", s.total_savings_cents},
                   {"lower_bound", s.lower_bound}};
  j["reference_savings"] = s.reference_cents ? nlohmann::json(format_cents(*s.reference_cents)) : nlohmann::json(nullptr);
  j["annotation"] = opt_json(s.annotation);
  return j;
}

// Victims = sum of the audiences given for platforms other than the seed.
inline SavingsEstimate estimate_cross_platform_savings(const PerPlatform<std::optional<std::int64_t>>& audience,
                                                       Platform seed, const Thresholds& thr) {
  SavingsEstimate s;
  s.seed_platform = seed;
  bool any = false;
  for (auto p : kAllPlatforms) {
    const auto& a = audience[index_of(p)];
    if (p == seed || !a) continue;
    if (*a < 0) throw Error(ErrorCode::missing_audience_data, "negative audience count");
    any = true;
    s.audience[index_of(p)] = *a;
    s.total_victims += *a;
  }
  if (!any) throw Error(ErrorCode::missing_audience_data, "no audience counts outside the seed platform");
  s.cost_per_victim_cents = usd_to_cents(thr.cost_per_victim_usd);
  s.total_savings_cents = s.total_victims * s.cost_per_victim_cents;
  if (thr.reference_savings_usd) {
    s.reference_cents = usd_to_cents(*thr.reference_savings_usd);
    if (*s.reference_cents != s.total_savings_cents)
      s.annotation = "reference figure " + format_cents(*s.reference_cents) + " differs from the exact product " +
                     std::to_string(s.total_victims) + " x " + format_cents(s.cost_per_victim_cents) + " = " +
                     format_cents(s.total_savings_cents);
  }
  return s;
}

// Audience an account reaches on its platform: friends on Facebook, followers elsewhere.
inline std::int64_t account_audience(const Account& a) {
  return a.platform == Platform::FB ? a.friends : a.followers;
}

// For each identity cluster with a taken-down member on the seed platform, the
// audiences of its still-active members elsewhere.
inline PerPlatform<std::optional<std::int64_t>> audience_from_identities(std::span<const IdentityCluster> clusters,
                                                                         const Corpus& corpus, Platform seed) {
  PerPlatform<std::optional<std::int64_t>> out{};
  std::set<AccountKey> counted;
  for (const auto& c : clusters) {
    const bool seed_down = std::any_of(c.members.begin(), c.members.end(), [&](const AccountKey& k) {
      const auto* a = corpus.find_account(k);
      return k.platform == seed && a != nullptr && taken_down(a->status);
    });
    if (!seed_down) continue;
    for (const auto& k : c.members) {
      const auto* a = corpus.find_account(k);
      if (k.platform == seed || a == nullptr || taken_down(a->status) || !counted.insert(k).second) continue;
      auto& slot = out[index_of(k.platform)];
      slot = slot.value_or(0) + account_audience(*a);
    }
  }
  return out;
}

}  // namespace phonespam
