#pragma once

// Campaign characterization: timing, automation, suspension, visibility and
// collusion, cross-platform references, first-appearance sequences, content
// attributes, domain blacklist lookups and origin distribution.
//
// Every function is a pure view over posts already held by a Corpus.
// "Undefined" results are std::optional and serialize as JSON null.

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/cluster.hpp"
#include "phonespam/ingest.hpp"
#include "phonespam/text.hpp"
#include "phonespam/url.hpp"

namespace phonespam {

using PostRefs = std::vector<const Post*>;

inline void sort_by_time(PostRefs& posts) {
  std::sort(posts.begin(), posts.end(), [](const Post* a, const Post* b) {
    return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->key() < b->key();
  });
}

// Campaign posts in (timestamp, key) order. Keys missing from the corpus are skipped.
inline PostRefs campaign_posts(const Campaign& c, const Corpus& corpus) {
  PostRefs out;
  out.reserve(c.post_ids.size());
  for (const auto& k : c.post_ids)
    if (const auto* p = corpus.find_post(k)) out.push_back(p);
  sort_by_time(out);
  return out;
}

template <typename T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// ---------------------------------------------------------------------------
// Inter-arrival

struct GapStats {
  std::size_t gaps = 0;
  double mean = 0;
  double median = 0;
  double p90 = 0;  // nearest-rank
};

inline nlohmann::json to_json(const GapStats& g) {
  return {{"gaps", g.gaps}, {"mean", g.mean}, {"median", g.median}, {"p90", g.p90}};
}

inline nlohmann::json to_json(const std::optional<GapStats>& g) { return g ? to_json(*g) : nlohmann::json(nullptr); }

inline std::vector<std::int64_t> consecutive_gaps(std::vector<Timestamp> ts) {
  std::sort(ts.begin(), ts.end());
  std::vector<std::int64_t> gaps;
  for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i] - ts[i - 1]);
  return gaps;
}

inline std::optional<GapStats> gap_stats(const std::vector<Timestamp>& timestamps) {
  auto gaps = consecutive_gaps(timestamps);
  if (gaps.empty()) return std::nullopt;
  std::sort(gaps.begin(), gaps.end());
  const auto n = gaps.size();
  GapStats s;
  s.gaps = n;
  s.mean = static_cast<double>(std::accumulate(gaps.begin(), gaps.end(), std::int64_t{0})) / static_cast<double>(n);
  s.median = n % 2 == 1 ? static_cast<double>(gaps[n / 2])
                        : (static_cast<double>(gaps[n / 2 - 1]) + static_cast<double>(gaps[n / 2])) / 2.0;
  s.p90 = static_cast<double>(gaps[(9 * n + 9) / 10 - 1]);
  return s;
}

enum class GroupBy { campaign, platform, account };

// Group key: "all", the platform code, or "PLATFORM:user_id".
inline std::map<std::string, std::optional<GapStats>> inter_arrival_stats(const PostRefs& posts, GroupBy by) {
  std::map<std::string, std::vector<Timestamp>> groups;
  for (const auto* p : posts) {
    switch (by) {
      case GroupBy::campaign: groups["all"].push_back(p->timestamp); break;
      case GroupBy::platform: groups[to_string(p->platform)].push_back(p->timestamp); break;
      case GroupBy::account: groups[to_string(p->author_key())].push_back(p->timestamp); break;
    }
  }
  std::map<std::string, std::optional<GapStats>> out;
  for (const auto& [k, ts] : groups) out[k] = gap_stats(ts);
  return out;
}

// ---------------------------------------------------------------------------
// Automation

inline const std::set<std::string, std::less<>>& messaging_tokens() {
  static const std::set<std::string, std::less<>> s = {"sms", "whatsapp", "whatsap", "watsapp", "wa", "txt"};
  return s;
}

inline bool mentions_messaging(std::string_view text) {
  const auto& m = messaging_tokens();
  for (const auto& t : word_tokens(text))
    if (m.count(t) > 0) return true;
  return false;
}

struct AutomationReport {
  std::size_t gaps = 0;
  std::size_t fast_gaps = 0;  // strictly below the automation gap
  double fraction = 0;
  std::map<std::string, std::size_t> clients;  // posts without a client count as "unknown"
  double messaging_fraction = 0;
};

inline nlohmann::json to_json(const AutomationReport& a) {
  return {{"gaps", a.gaps},
          {"fast_gaps", a.fast_gaps},
          {"fraction", a.fraction},
          {"clients", a.clients},
          {"messaging_fraction", a.messaging_fraction}};
}

// Expects the posts of one platform.
inline AutomationReport automation_fraction(const PostRefs& posts, const Thresholds& thr) {
  if (posts.size() < 2) throw Error(ErrorCode::insufficient_posts, "automation_fraction needs >= 2 posts");
  std::vector<Timestamp> ts;
  AutomationReport r;
  std::size_t messaging = 0;
  for (const auto* p : posts) {
    ts.push_back(p->timestamp);
    ++r.clients[p->client.value_or("unknown")];
    if (mentions_messaging(p->text)) ++messaging;
  }
  const auto gaps = consecutive_gaps(std::move(ts));
  r.gaps = gaps.size();
  r.fast_gaps = static_cast<std::size_t>(
      std::count_if(gaps.begin(), gaps.end(), [&](std::int64_t g) { return g < thr.automation_gap_seconds; }));
  r.fraction = static_cast<double>(r.fast_gaps) / static_cast<double>(r.gaps);
  r.messaging_fraction = static_cast<double>(messaging) / static_cast<double>(posts.size());
  return r;
}

// ---------------------------------------------------------------------------
// Pearson

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::length_mismatch, "pearson: x and y differ in length");
  if (x.size() < 2) throw Error(ErrorCode::length_mismatch, "pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::degenerate_variance, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Suspension

inline constexpr std::int64_t kSecondsPerDay = 86400;

inline bool taken_down(AccountStatus s) { return s == AccountStatus::suspended || s == AccountStatus::deleted; }

struct AccountLifetime {
  AccountKey account;
  Timestamp first_post = 0;
  Timestamp last_post = 0;
  std::int64_t lifetime_days = 0;
};

struct SuspensionStats {
  std::size_t total_accounts = 0;
  std::size_t suspended_count = 0;  // suspended or deleted
  std::size_t within_day_count = 0;  // lifetime 0
  std::optional<double> never_suspended_fraction;
  std::optional<double> mean_lifetime_days;
  std::vector<AccountLifetime> lifetimes;  // taken-down accounts, ascending key
  bool lifetime_is_approximation = true;   // takedown time taken as the last observed post
};

inline nlohmann::json to_json(const SuspensionStats& s) {
  auto lifetimes = nlohmann::json::array();
  for (const auto& l : s.lifetimes)
    lifetimes.push_back({{"account", to_string(l.account)},
                         {"first_post", l.first_post},
                         {"last_post", l.last_post},
                         {"lifetime_days", l.lifetime_days}});
  return {{"total_accounts", s.total_accounts},
          {"suspended_count", s.suspended_count},
          {"within_day_count", s.within_day_count},
          {"never_suspended_fraction", opt_json(s.never_suspended_fraction)},
          {"mean_lifetime_days", opt_json(s.mean_lifetime_days)},
          {"lifetime_is_approximation", s.lifetime_is_approximation},
          {"lifetimes", std::move(lifetimes)}};
}

// Accounts are the authors of `posts`; lifetimes use those posts only.
inline SuspensionStats suspension_stats(const PostRefs& posts, const Corpus& corpus) {
  std::map<AccountKey, std::pair<Timestamp, Timestamp>> span;
  for (const auto* p : posts) {
    auto [it, fresh] = span.try_emplace(p->author_key(), p->timestamp, p->timestamp);
    if (!fresh) {
      it->second.first = std::min(it->second.first, p->timestamp);
      it->second.second = std::max(it->second.second, p->timestamp);
    }
  }
  SuspensionStats s;
  s.total_accounts = span.size();
  std::int64_t day_sum = 0;
  for (const auto& [key, range] : span) {
    const auto* a = corpus.find_account(key);
    if (a == nullptr || !taken_down(a->status)) continue;
    AccountLifetime l{key, range.first, range.second, (range.second - range.first) / kSecondsPerDay};
    ++s.suspended_count;
    if (l.lifetime_days == 0) ++s.within_day_count;
    day_sum += l.lifetime_days;
    s.lifetimes.push_back(std::move(l));
  }
  if (s.total_accounts > 0)
    s.never_suspended_fraction =
        static_cast<double>(s.total_accounts - s.suspended_count) / static_cast<double>(s.total_accounts);
  if (s.suspended_count > 0) s.mean_lifetime_days = static_cast<double>(day_sum) / static_cast<double>(s.suspended_count);
  return s;
}

// ---------------------------------------------------------------------------
// Visibility and collusion

// TW likes+retweets, FB likes(+reactions)+reshares, GP +1s+reshares, YT video
// likes. Flickr is excluded.
inline bool counts_shares(Platform p) { return p == Platform::TW || p == Platform::FB || p == Platform::GP; }

inline std::int64_t post_visibility(const Post& p) {
  if (p.platform == Platform::FL) return 0;
  return p.engagement.likes + (counts_shares(p.platform) ? p.engagement.shares : 0);
}

struct VisibilityBreakdown {
  PerPlatform<std::int64_t> raw{};
  std::optional<PerPlatform<std::int64_t>> adjusted;  // unavailable without actor data
  std::optional<double> colluder_contribution;

  static constexpr bool excluded(Platform p) { return p == Platform::FL; }
  std::int64_t raw_total() const { return std::accumulate(raw.begin(), raw.end(), std::int64_t{0}); }
  std::optional<std::int64_t> adjusted_total() const {
    if (!adjusted) return std::nullopt;
    return std::accumulate(adjusted->begin(), adjusted->end(), std::int64_t{0});
  }
};

inline nlohmann::json to_json(const VisibilityBreakdown& v) {
  nlohmann::json per = nlohmann::json::object();
  for (auto p : kAllPlatforms) {
    nlohmann::json e{{"raw", v.raw[index_of(p)]}, {"excluded", VisibilityBreakdown::excluded(p)}};
    e["collusion_adjusted"] = v.adjusted ? nlohmann::json((*v.adjusted)[index_of(p)]) : nlohmann::json(nullptr);
    per[to_string(p)] = std::move(e);
  }
  return {{"per_platform", std::move(per)},
          {"raw_total", v.raw_total()},
          {"collusion_adjusted_total", opt_json(v.adjusted_total())},
          {"colluder_contribution", opt_json(v.colluder_contribution)}};
}

inline VisibilityBreakdown compute_visibility(const PostRefs& posts) {
  VisibilityBreakdown v;
  for (const auto* p : posts) v.raw[index_of(p->platform)] += post_visibility(*p);
  return v;
}

enum class EngagementKind { like, share };

struct EngagementAction {
  AccountKey actor;
  EngagementKind kind = EngagementKind::like;
};

// Who engaged with each post; loaded from the engagement-actor sidecar.
using EngagementActors = std::map<PostKey, std::vector<EngagementAction>>;

// Sidecar lines: {"platform","post_id","actor_platform"?,"actor_user_id","action":"like"|"share"}.
// actor_platform defaults to the post's platform.
inline EngagementActors parse_engagement_actors(std::istream& in) {
  EngagementActors out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto platform = parse_platform(j.at("platform").get<std::string>());
      const auto actor_platform = parse_platform(j.value("actor_platform", j.at("platform").get<std::string>()));
      const auto action = j.at("action").get<std::string>();
      if (!platform || !actor_platform || (action != "like" && action != "share"))
        throw Error(ErrorCode::io_error, "bad engagement record at line " + std::to_string(lineno));
      out[{*platform, j.at("post_id").get<std::string>()}].push_back(
          {{*actor_platform, j.at("actor_user_id").get<std::string>()},
           action == "like" ? EngagementKind::like : EngagementKind::share});
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::io_error, "engagement actors line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

inline EngagementActors load_engagement_actors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return parse_engagement_actors(in);
}

// Removes actions by the campaign's own authors. Throws missing_actor_data
// when no actor data is available at all.
inline VisibilityBreakdown collusion_adjusted_visibility(const PostRefs& posts, const std::set<AccountKey>& authors,
                                                         const EngagementActors& actors) {
  if (actors.empty()) throw Error(ErrorCode::missing_actor_data, "no engagement actor data");
  VisibilityBreakdown v = compute_visibility(posts);
  PerPlatform<std::int64_t> adjusted = v.raw;
  for (const auto* p : posts) {
    if (p->platform == Platform::FL) continue;
    auto it = actors.find(p->key());
    if (it == actors.end()) continue;
    std::int64_t colluding = 0;
    for (const auto& a : it->second) {
      const bool counted = a.kind == EngagementKind::like || counts_shares(p->platform);
      if (counted && authors.count(a.actor) > 0) ++colluding;
    }
    auto& slot = adjusted[index_of(p->platform)];
    slot -= std::min(colluding, post_visibility(*p));
  }
  v.adjusted = adjusted;
  const auto raw = v.raw_total();
  v.colluder_contribution =
      raw == 0 ? 0.0 : 1.0 - static_cast<double>(*v.adjusted_total()) / static_cast<double>(raw);
  return v;
}

// ---------------------------------------------------------------------------
// URLs

// Record URLs followed by URLs found in the text, deduplicated.
inline std::vector<std::string> post_urls(const Post& p) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& u : p.urls)
    if (seen.insert(u).second) out.push_back(u);
  for (auto& u : extract_text_urls(p.text))
    if (seen.insert(u).second) out.push_back(std::move(u));
  return out;
}

struct CrossReference {
  Platform source{Platform::TW};
  Platform target{Platform::TW};
  PostKey post;
  std::string url;
};

inline std::vector<CrossReference> detect_cross_references(const PostRefs& posts,
                                                           const OsnDomainMap& map = default_osn_domains()) {
  std::vector<CrossReference> out;
  for (const auto* p : posts)
    for (const auto& u : post_urls(*p)) {
      const auto target = platform_for_host(url_host(u), map);
      if (target && *target != p->platform) out.push_back({p->platform, *target, p->key(), u});
    }
  return out;
}

// "source>target" -> count.
inline std::map<std::string, std::size_t> cross_reference_counts(const std::vector<CrossReference>& refs) {
  std::map<std::string, std::size_t> out;
  for (const auto& r : refs) ++out[std::string(to_string(r.source)) + ">" + to_string(r.target)];
  return out;
}

// ---------------------------------------------------------------------------
// First-appearance sequences

struct SequenceEntry {
  std::string phone;
  Platform start{Platform::TW};
  std::vector<Platform> sequence;
  PerPlatform<std::optional<Timestamp>> first_seen{};
  std::optional<std::int64_t> inter_osn_latency;  // undefined for single-platform phones
};

inline std::string sequence_string(const std::vector<Platform>& seq) {
  std::string s;
  for (auto p : seq) {
    if (!s.empty()) s += ">";
    s += to_string(p);
  }
  return s;
}

inline nlohmann::json to_json(const SequenceEntry& e) {
  auto seq = nlohmann::json::array();
  for (auto p : e.sequence) seq.push_back(to_string(p));
  nlohmann::json first = nlohmann::json::object();
  for (auto p : kAllPlatforms)
    if (e.first_seen[index_of(p)]) first[to_string(p)] = *e.first_seen[index_of(p)];
  return {{"phone", e.phone},
          {"start", to_string(e.start)},
          {"sequence", std::move(seq)},
          {"first_seen", std::move(first)},
          {"inter_osn_latency", opt_json(e.inter_osn_latency)}};
}

// Platforms ordered by earliest post carrying the phone; ties follow the fixed
// platform order. Empty when no post carries the phone.
inline std::optional<SequenceEntry> first_appearance_sequence(std::string_view phone, const PostRefs& posts) {
  SequenceEntry e;
  e.phone = std::string(phone);
  for (const auto* p : posts) {
    if (!p->has_phone(phone)) continue;
    auto& slot = e.first_seen[index_of(p->platform)];
    if (!slot || p->timestamp < *slot) slot = p->timestamp;
  }
  for (auto p : kAllPlatforms)
    if (e.first_seen[index_of(p)]) e.sequence.push_back(p);
  if (e.sequence.empty()) return std::nullopt;
  std::stable_sort(e.sequence.begin(), e.sequence.end(), [&](Platform a, Platform b) {
    return *e.first_seen[index_of(a)] < *e.first_seen[index_of(b)];
  });
  e.start = e.sequence.front();
  if (e.sequence.size() > 1) e.inter_osn_latency = *e.first_seen[index_of(e.sequence[1])] - *e.first_seen[index_of(e.start)];
  return e;
}

struct SequenceResult {
  std::vector<SequenceEntry> entries;  // ascending phone
  PerPlatform<std::size_t> start_histogram{};
  std::map<std::string, std::size_t> sequence_histogram;  // "TW>GP>YT" -> phones
  std::optional<std::string> most_common;                  // highest count, then lexicographic
  std::optional<double> mean_inter_osn_latency;
};

inline nlohmann::json to_json(const SequenceResult& s) {
  auto entries = nlohmann::json::array();
  for (const auto& e : s.entries) entries.push_back(to_json(e));
  nlohmann::json starts = nlohmann::json::object();
  for (auto p : kAllPlatforms) starts[to_string(p)] = s.start_histogram[index_of(p)];
  return {{"entries", std::move(entries)},
          {"start_histogram", std::move(starts)},
          {"sequence_histogram", s.sequence_histogram},
          {"most_common", opt_json(s.most_common)},
          {"mean_inter_osn_latency", opt_json(s.mean_inter_osn_latency)}};
}

inline SequenceResult sequence_analysis(const std::vector<std::string>& phones, const PostRefs& posts) {
  SequenceResult r;
  std::set<std::string> unique(phones.begin(), phones.end());
  std::int64_t latency_sum = 0;
  std::size_t latency_n = 0;
  for (const auto& ph : unique) {
    auto e = first_appearance_sequence(ph, posts);
    if (!e) continue;
    ++r.start_histogram[index_of(e->start)];
    ++r.sequence_histogram[sequence_string(e->sequence)];
    if (e->inter_osn_latency) {
      latency_sum += *e->inter_osn_latency;
      ++latency_n;
    }
    r.entries.push_back(std::move(*e));
  }
  std::size_t best = 0;
  for (const auto& [seq, n] : r.sequence_histogram)
    if (n > best) {
      best = n;
      r.most_common = seq;
    }
  if (latency_n > 0) r.mean_inter_osn_latency = static_cast<double>(latency_sum) / static_cast<double>(latency_n);
  return r;
}

// ---------------------------------------------------------------------------
// Content attributes

inline bool has_hashtag(std::string_view text) {
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '#') continue;
    if (i > 0 && detail::is_word_char(text[i - 1])) continue;
    const char c = text[i + 1];
    if (is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80) return true;
  }
  return false;
}

struct AttributeReport {
  std::size_t posts = 0;
  std::optional<double> hashtags, urls, short_urls, photos;
};

inline nlohmann::json to_json(const AttributeReport& a) {
  return {{"posts", a.posts},
          {"hashtags", opt_json(a.hashtags)},
          {"urls", opt_json(a.urls)},
          {"short_urls", opt_json(a.short_urls)},
          {"photos", opt_json(a.photos)}};
}

inline AttributeReport content_attribute_report(const PostRefs& posts,
                                                const std::set<std::string, std::less<>>& shorteners = default_shorteners()) {
  AttributeReport r;
  r.posts = posts.size();
  if (posts.empty()) return r;
  std::size_t tags = 0, urls = 0, shorts = 0, photos = 0;
  for (const auto* p : posts) {
    const auto u = post_urls(*p);
    tags += has_hashtag(p->text) ? 1 : 0;
    urls += u.empty() ? 0 : 1;
    shorts += std::any_of(u.begin(), u.end(), [&](const std::string& x) { return host_in(url_host(x), shorteners); })
                  ? 1
                  : 0;
    photos += p->has_photo ? 1 : 0;
  }
  const double n = static_cast<double>(posts.size());
  r.hashtags = static_cast<double>(tags) / n;
  r.urls = static_cast<double>(urls) / n;
  r.short_urls = static_cast<double>(shorts) / n;
  r.photos = static_cast<double>(photos) / n;
  return r;
}

// ---------------------------------------------------------------------------
// Domain blacklist

using DomainSet = std::set<std::string, std::less<>>;

// One domain per line; "#" comments, a leading "*." or "." and URL schemes are tolerated.
inline DomainSet load_blacklist(const std::string& path) {
  DomainSet out;
  for (const auto& line : read_list_file(path)) {
    std::string d = line.find('/') != std::string::npos ? url_host(line) : to_lower(trim(line));
    if (starts_with(d, "*.")) d.erase(0, 2);
    while (!d.empty() && d.front() == '.') d.erase(0, 1);
    if (!d.empty()) out.insert(std::move(d));
  }
  return out;
}

struct BlacklistResult {
  std::vector<std::string> distinct_domains;  // registrable domains, ascending
  std::vector<std::string> flagged;
  std::optional<double> flagged_fraction;  // undefined without URLs
};

inline nlohmann::json to_json(const BlacklistResult& b) {
  return {{"distinct_domains", b.distinct_domains.size()},
          {"flagged", b.flagged},
          {"flagged_fraction", opt_json(b.flagged_fraction)}};
}

// A domain is flagged when any URL host grouped under it, or a parent of that
// host, is listed.
inline BlacklistResult domain_blacklist_check(const std::vector<std::string>& urls, const DomainSet& blacklist) {
  std::map<std::string, bool> domains;
  for (const auto& u : urls) {
    const auto host = url_host(u);
    if (host.empty()) continue;
    bool& flag = domains[registrable_domain(host)];
    if (!flag) flag = host_in(host, blacklist) || blacklist.count(host) > 0;
  }
  BlacklistResult r;
  for (const auto& [d, flagged] : domains) {
    r.distinct_domains.push_back(d);
    if (flagged) r.flagged.push_back(d);
  }
  if (!domains.empty())
    r.flagged_fraction = static_cast<double>(r.flagged.size()) / static_cast<double>(domains.size());
  return r;
}

inline std::vector<std::string> all_urls(const PostRefs& posts) {
  std::vector<std::string> out;
  for (const auto* p : posts)
    for (auto& u : post_urls(*p)) out.push_back(std::move(u));
  return out;
}

// ---------------------------------------------------------------------------
// Origin distribution

struct OriginBucket {
  std::size_t campaign_count = 0;
  std::size_t post_count = 0;
};

inline std::map<std::string, OriginBucket> origin_distribution(std::span<const Campaign> campaigns) {
  std::map<std::string, OriginBucket> out;
  for (const auto& c : campaigns) {
    auto& b = out[c.origin_country.value_or(std::string(kUnknownCountry))];
    ++b.campaign_count;
    b.post_count += c.post_ids.size();
  }
  return out;
}

inline nlohmann::json to_json(const std::map<std::string, OriginBucket>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, b] : m) j[k] = {{"campaign_count", b.campaign_count}, {"post_count", b.post_count}};
  return j;
}

// ---------------------------------------------------------------------------
// Account activity timeline

enum class Period { day, week };

inline std::int64_t period_seconds(Period p) { return p == Period::day ? kSecondsPerDay : 7 * kSecondsPerDay; }

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

struct PeriodActivity {
  std::int64_t period = 0;  // epoch-aligned period index
  Timestamp period_start = 0;
  std::size_t new_accounts = 0;
  std::size_t posts = 0;
  std::map<std::size_t, std::size_t> posts_per_account;  // posts -> accounts active in the period
  double median_posts_per_account = 0;
};

inline double histogram_median(const std::map<std::size_t, std::size_t>& h) {
  std::size_t total = 0;
  for (const auto& [v, n] : h) total += n;
  if (total == 0) return 0;
  auto nth = [&](std::size_t idx) {
    for (const auto& [v, n] : h) {
      if (idx < n) return static_cast<double>(v);
      idx -= n;
    }
    return 0.0;
  };
  return total % 2 == 1 ? nth(total / 2) : (nth(total / 2 - 1) + nth(total / 2)) / 2.0;
}

inline std::vector<PeriodActivity> account_activity_timeline(const PostRefs& posts, Period period) {
  const auto len = period_seconds(period);
  std::map<AccountKey, std::int64_t> first_period;
  std::map<std::int64_t, std::map<AccountKey, std::size_t>> per_period;
  for (const auto* p : posts) {
    const auto idx = floor_div(p->timestamp, len);
    auto [it, fresh] = first_period.try_emplace(p->author_key(), idx);
    if (!fresh) it->second = std::min(it->second, idx);
    ++per_period[idx][p->author_key()];
  }
  std::map<std::int64_t, std::size_t> fresh_by_period;
  for (const auto& [acct, idx] : first_period) ++fresh_by_period[idx];
  std::vector<PeriodActivity> out;
  for (const auto& [idx, accounts] : per_period) {
    PeriodActivity a;
    a.period = idx;
    a.period_start = idx * len;
    a.new_accounts = fresh_by_period[idx];
    for (const auto& [acct, n] : accounts) {
      a.posts += n;
      ++a.posts_per_account[n];
    }
    a.median_posts_per_account = histogram_median(a.posts_per_account);
    out.push_back(std::move(a));
  }
  return out;
}

inline nlohmann::json to_json(const PeriodActivity& a) {
  nlohmann::json dist = nlohmann::json::object();
  for (const auto& [v, n] : a.posts_per_account) dist[std::to_string(v)] = n;
  return {{"period", a.period},
          {"period_start", a.period_start},
          {"new_accounts", a.new_accounts},
          {"posts", a.posts},
          {"posts_per_account", std::move(dist)},
          {"median_posts_per_account", a.median_posts_per_account}};
}

// ---------------------------------------------------------------------------
// Per-campaign bundle

struct MetricsContext {
  OsnDomainMap osn_domains = default_osn_domains();
  DomainSet shorteners = default_shorteners();
  std::optional<DomainSet> blacklist;
  std::optional<EngagementActors> actors;
};

struct CampaignMetrics {
  std::string campaign_id;
  std::size_t post_count = 0;
  PerPlatform<std::size_t> platform_posts{};
  std::optional<GapStats> inter_arrival;
  PerPlatform<std::optional<GapStats>> inter_arrival_by_platform{};
  PerPlatform<std::optional<AutomationReport>> automation{};
  std::optional<double> automation_fraction;  // over the per-platform gaps combined
  SuspensionStats suspension;
  VisibilityBreakdown visibility;
  SequenceResult sequence;
  AttributeReport attributes;
  std::map<std::string, std::size_t> cross_references;
  std::optional<BlacklistResult> blacklist;
};

inline nlohmann::json to_json(const CampaignMetrics& m) {
  nlohmann::json platform_posts = nlohmann::json::object(), ia = nlohmann::json::object(),
                 automation = nlohmann::json::object();
  for (auto p : kAllPlatforms) {
    const auto i = index_of(p);
    platform_posts[to_string(p)] = m.platform_posts[i];
    ia[to_string(p)] = to_json(m.inter_arrival_by_platform[i]);
    automation[to_string(p)] = m.automation[i] ? to_json(*m.automation[i]) : nlohmann::json(nullptr);
  }
  nlohmann::json j{{"campaign_id", m.campaign_id},
                   {"post_count", m.post_count},
                   {"platform_posts", std::move(platform_posts)},
                   {"inter_arrival", {{"overall", to_json(m.inter_arrival)}, {"per_platform", std::move(ia)}}},
                   {"automation", {{"fraction", opt_json(m.automation_fraction)}, {"per_platform", std::move(automation)}}},
                   {"suspension", to_json(m.suspension)},
                   {"visibility", to_json(m.visibility)},
                   {"sequence", to_json(m.sequence)},
                   {"attributes", to_json(m.attributes)},
                   {"cross_references", m.cross_references}};
  j["blacklist"] = m.blacklist ? to_json(*m.blacklist) : nlohmann::json(nullptr);
  return j;
}

inline CampaignMetrics compute_campaign_metrics(const Campaign& c, const Corpus& corpus, const Thresholds& thr,
                                                const MetricsContext& ctx = {}) {
  CampaignMetrics m;
  m.campaign_id = c.campaign_id;
  const auto posts = campaign_posts(c, corpus);
  m.post_count = posts.size();

  PerPlatform<PostRefs> by_platform;
  for (const auto* p : posts) by_platform[index_of(p->platform)].push_back(p);
  std::vector<Timestamp> all_ts;
  for (const auto* p : posts) all_ts.push_back(p->timestamp);
  m.inter_arrival = gap_stats(all_ts);

  std::size_t gaps = 0, fast = 0;
  for (auto p : kAllPlatforms) {
    const auto& group = by_platform[index_of(p)];
    m.platform_posts[index_of(p)] = group.size();
    std::vector<Timestamp> ts;
    for (const auto* q : group) ts.push_back(q->timestamp);
    m.inter_arrival_by_platform[index_of(p)] = gap_stats(ts);
    if (group.size() >= 2) {
      auto a = automation_fraction(group, thr);
      gaps += a.gaps;
      fast += a.fast_gaps;
      m.automation[index_of(p)] = std::move(a);
    }
  }
  if (gaps > 0) m.automation_fraction = static_cast<double>(fast) / static_cast<double>(gaps);

  m.suspension = suspension_stats(posts, corpus);
  if (ctx.actors) {
    try {
      const std::set<AccountKey> authors(c.user_ids.begin(), c.user_ids.end());
      m.visibility = collusion_adjusted_visibility(posts, authors, *ctx.actors);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::missing_actor_data) throw;
      m.visibility = compute_visibility(posts);
    }
  } else {
    m.visibility = compute_visibility(posts);
  }

  std::vector<std::string> phones;
  for (const auto& p : c.phones) phones.push_back(p.canonical);
  m.sequence = sequence_analysis(phones, posts);
  m.attributes = content_attribute_report(posts, ctx.shorteners);
  m.cross_references = cross_reference_counts(detect_cross_references(posts, ctx.osn_domains));
  if (ctx.blacklist) m.blacklist = domain_blacklist_check(all_urls(posts), *ctx.blacklist);
  return m;
}

}  // namespace phonespam
