#pragma once

// Normalized post/account records shared by every stage, and the tunable
// thresholds record.

#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/common.hpp"
#include "phonespam/phone.hpp"

namespace phonespam {

struct Engagement {
  std::int64_t likes = 0;      // likes, +1s, video likes (Facebook reactions folded in)
  std::int64_t shares = 0;     // retweets / reshares / shares
  std::int64_t reactions = 0;  // raw Facebook reactions, kept for reference
  std::int64_t views = 0;      // Flickr view count, never counted as visibility
};

struct Post {
  std::string post_id;
  Platform platform{Platform::TW};
  std::string author;  // user_id on the same platform
  Timestamp timestamp{0};
  std::string text;
  std::vector<std::string> urls;
  std::vector<PhoneNumber> phones;  // unique, in order of first appearance
  Engagement engagement;
  std::optional<std::string> client;
  std::optional<std::string> language;
  bool has_photo{false};

  PostKey key() const { return {platform, post_id}; }
  AccountKey author_key() const { return {platform, author}; }

  bool has_phone(std::string_view canonical) const {
    return std::any_of(phones.begin(), phones.end(), [&](const PhoneNumber& p) { return p.canonical == canonical; });
  }
};

enum class AccountStatus { active, suspended, deleted, unknown };

inline const char* to_string(AccountStatus s) {
  switch (s) {
    case AccountStatus::active: return "active";
    case AccountStatus::suspended: return "suspended";
    case AccountStatus::deleted: return "deleted";
    case AccountStatus::unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<AccountStatus> parse_account_status(std::string_view s) {
  if (s == "active") return AccountStatus::active;
  if (s == "suspended") return AccountStatus::suspended;
  if (s == "deleted") return AccountStatus::deleted;
  if (s == "unknown") return AccountStatus::unknown;
  return std::nullopt;
}

struct StatusObservation {
  AccountStatus status{AccountStatus::unknown};
  Timestamp checked_at{0};
};

struct Account {
  Platform platform{Platform::TW};
  std::string user_id;
  std::optional<std::string> screen_name;
  std::string display_name;
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  bool verified = false;
  AccountStatus status{AccountStatus::unknown};
  std::optional<Timestamp> status_checked_at;
  std::vector<StatusObservation> status_history;  // ascending checked_at
  Timestamp profile_observed_at = 0;

  AccountKey key() const { return {platform, user_id}; }
};

// ---------------------------------------------------------------------------

enum class SimilarityMode { pairwise, aggregate };

struct Thresholds {
  double token_overlap = 0.33;
  double jaccard_merge = 0.7;
  double silhouette_target = 0.8;  // reference only, never enforced
  std::int64_t min_campaign_posts = 5000;
  std::int64_t automation_gap_seconds = 600;
  double identity_similarity = 0.7;
  double profile_doc_frequency = 0.5;
  double cost_per_victim_usd = 290.9;

  // Clustering knobs.
  std::size_t profile_token_cap = 50;
  std::size_t pair_sample_cap = 10000;
  std::size_t context_window = 0;  // tokens either side of the phone; 0 = whole post
  SimilarityMode similarity_mode = SimilarityMode::pairwise;
  std::uint64_t seed = 20160425;

  // Reports.
  std::optional<double> reference_savings_usd;

  void validate() const {
    auto frac = [](const char* name, double v) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_config, std::string(name) + " must be in [0,1]");
    };
    frac("token_overlap", token_overlap);
    frac("jaccard_merge", jaccard_merge);
    frac("silhouette_target", silhouette_target);
    frac("identity_similarity", identity_similarity);
    frac("profile_doc_frequency", profile_doc_frequency);
    if (min_campaign_posts < 1) throw Error(ErrorCode::invalid_config, "min_campaign_posts must be >= 1");
    if (automation_gap_seconds < 0) throw Error(ErrorCode::invalid_config, "automation_gap_seconds must be >= 0");
    if (!(cost_per_victim_usd >= 0.0)) throw Error(ErrorCode::invalid_config, "cost_per_victim_usd must be >= 0");
    if (pair_sample_cap == 0) throw Error(ErrorCode::invalid_config, "pair_sample_cap must be >= 1");
    if (profile_token_cap == 0) throw Error(ErrorCode::invalid_config, "profile_token_cap must be >= 1");
  }
};

inline nlohmann::json to_json(const Thresholds& t) {
  nlohmann::json j{{"token_overlap", t.token_overlap},
                   {"jaccard_merge", t.jaccard_merge},
                   {"silhouette_target", t.silhouette_target},
                   {"min_campaign_posts", t.min_campaign_posts},
                   {"automation_gap_seconds", t.automation_gap_seconds},
                   {"identity_similarity", t.identity_similarity},
                   {"profile_doc_frequency", t.profile_doc_frequency},
                   {"cost_per_victim_usd", t.cost_per_victim_usd},
                   {"profile_token_cap", t.profile_token_cap},
                   {"pair_sample_cap", t.pair_sample_cap},
                   {"context_window", t.context_window},
                   {"similarity_mode", t.similarity_mode == SimilarityMode::pairwise ? "pairwise" : "aggregate"},
                   {"seed", t.seed}};
  if (t.reference_savings_usd) j["reference_savings_usd"] = *t.reference_savings_usd;
  return j;
}

inline Thresholds thresholds_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "thresholds config must be a JSON object");
  Thresholds t;
  try {
    t.token_overlap = j.value("token_overlap", t.token_overlap);
    t.jaccard_merge = j.value("jaccard_merge", t.jaccard_merge);
    t.silhouette_target = j.value("silhouette_target", t.silhouette_target);
    t.min_campaign_posts = j.value("min_campaign_posts", t.min_campaign_posts);
    t.automation_gap_seconds = j.value("automation_gap_seconds", t.automation_gap_seconds);
    t.identity_similarity = j.value("identity_similarity", t.identity_similarity);
    t.profile_doc_frequency = j.value("profile_doc_frequency", t.profile_doc_frequency);
    t.cost_per_victim_usd = j.value("cost_per_victim_usd", t.cost_per_victim_usd);
    t.profile_token_cap = j.value("profile_token_cap", t.profile_token_cap);
    t.pair_sample_cap = j.value("pair_sample_cap", t.pair_sample_cap);
    t.context_window = j.value("context_window", t.context_window);
    t.seed = j.value("seed", t.seed);
    const auto mode = j.value("similarity_mode", std::string("pairwise"));
    if (mode == "pairwise")
      t.similarity_mode = SimilarityMode::pairwise;
    else if (mode == "aggregate")
      t.similarity_mode = SimilarityMode::aggregate;
    else
      throw Error(ErrorCode::invalid_config, "similarity_mode must be pairwise or aggregate");
    if (j.contains("reference_savings_usd") && !j["reference_savings_usd"].is_null())
      t.reference_savings_usd = j["reference_savings_usd"].get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_config, ex.what());
  }
  t.validate();
  return t;
}

inline Thresholds load_thresholds(const std::string& path) {
  try {
    return thresholds_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::invalid_config, path + ": " + ex.what());
  }
}

// ---------------------------------------------------------------------------
// JSON encodings of the stored records.

inline nlohmann::json to_json(const PhoneNumber& p) {
  nlohmann::json j{{"canonical", p.canonical},
                   {"country", p.country},
                   {"line_type", to_string(p.line_type)},
                   {"international_prefix", p.international_prefix}};
  j["country_code"] = p.country_code ? nlohmann::json(*p.country_code) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const Post& p) {
  nlohmann::json phones = nlohmann::json::array();
  for (const auto& ph : p.phones) phones.push_back(ph.canonical);
  nlohmann::json j{{"post_id", p.post_id},
                   {"platform", to_string(p.platform)},
                   {"author", p.author},
                   {"timestamp", p.timestamp},
                   {"text", p.text},
                   {"urls", p.urls},
                   {"phones", std::move(phones)},
                   {"engagement",
                    {{"likes", p.engagement.likes},
                     {"shares", p.engagement.shares},
                     {"reactions", p.engagement.reactions},
                     {"views", p.engagement.views}}},
                   {"has_photo", p.has_photo}};
  if (p.client) j["client"] = *p.client;
  if (p.language) j["language"] = *p.language;
  return j;
}

inline nlohmann::json to_json(const Account& a) {
  nlohmann::json j{{"platform", to_string(a.platform)},
                   {"user_id", a.user_id},
                   {"display_name", a.display_name},
                   {"followers", a.followers},
                   {"friends", a.friends},
                   {"verified", a.verified},
                   {"status", to_string(a.status)}};
  j["screen_name"] = a.screen_name ? nlohmann::json(*a.screen_name) : nlohmann::json(nullptr);
  j["status_checked_at"] = a.status_checked_at ? nlohmann::json(*a.status_checked_at) : nlohmann::json(nullptr);
  auto hist = nlohmann::json::array();
  for (const auto& h : a.status_history) hist.push_back({{"status", to_string(h.status)}, {"checked_at", h.checked_at}});
  j["status_history"] = std::move(hist);
  return j;
}

// "2016-04-25T10:00:00Z" (also without the trailing Z), UTC.
inline std::optional<Timestamp> parse_iso8601_utc(std::string_view s) {
  std::tm tm{};
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char tail = 0;
  const std::string str(s);
  const int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail);
  if (n < 6 || (n == 7 && tail != 'Z')) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  return static_cast<Timestamp>(timegm(&tm));
}

}  // namespace phonespam
