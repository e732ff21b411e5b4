#pragma once

// Loading platform dumps into the working corpus: record parsing, the
// keyword/noise filter, key-based dedupe and the account status snapshots.
//
// The corpus persists as three append-only JSON Lines logs in its data
// directory (posts.jsonl, accounts.jsonl, statuses.jsonl) plus ingest_log.jsonl;
// opening a directory replays them into the in-memory index.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/model.hpp"
#include "phonespam/phone.hpp"

namespace phonespam {

using nlohmann::json;

// Collection keywords. Editable: the CLI takes --keywords FILE.
inline const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> k = {
      "call",     "calls",    "sms",      "whatsapp", "wa",       "ring",    "contact",  "dial",   "reach",
      "text",     "phone",    "hotline",  "helpline", "tel",      "telp",    "telepon",  "hubungi", "bbm",
      "line",     "kontak",   "order",    "pesan",    "booking",  "book",    "support",  "customer", "service",
      "tollfree", "enquiry",  "inquiry",  "mobile",   "cell",     "number",  "callback", "viber",  "telegram",
      "message",  "msg",      "inbox",    "pm",       "dm",       "helpdesk", "assistance", "consult", "appointment",
      "reservation", "24x7",  "ph",       "mob",     "no",       "hp",     "cs"};
  return k;
}

// Lowercased alphanumeric runs; non-ASCII bytes are kept inside runs.
inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (is_ascii_digit(c) || is_ascii_alpha(c) || uc >= 0x80) {
      cur.push_back(ascii_lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// True iff the post carries an extracted phone number, or its text holds any
// keyword as a token. Multi-word keywords match as a phrase of tokens.
inline bool keyword_filter(const Post& post, const std::vector<std::string>& keywords) {
  if (!post.phones.empty()) return true;
  const auto tokens = word_tokens(post.text);
  if (tokens.empty()) return false;
  const std::set<std::string, std::less<>> token_set(tokens.begin(), tokens.end());
  std::string joined = " ";
  for (const auto& t : tokens) joined += t + " ";
  for (const auto& kw : keywords) {
    if (kw.find(' ') == std::string::npos) {
      if (token_set.count(kw) > 0) return true;
    } else {
      std::string phrase;
      for (const auto& t : word_tokens(kw)) phrase += t + " ";
      if (!phrase.empty() && joined.find(" " + phrase) != std::string::npos) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Record parsing

enum class PostRejection { none, malformed_json, missing_required_field, bad_timestamp, unknown_platform, invalid_field };

inline const char* to_string(PostRejection r) {
  switch (r) {
    case PostRejection::none: return "none";
    case PostRejection::malformed_json: return "malformed_json";
    case PostRejection::missing_required_field: return "missing_required_field";
    case PostRejection::bad_timestamp: return "bad_timestamp";
    case PostRejection::unknown_platform: return "unknown_platform";
    case PostRejection::invalid_field: return "invalid_field";
  }
  return "none";
}

// Author details that came with a post when "author" was given as an object.
struct AuthorProfile {
  std::optional<std::string> screen_name;
  std::optional<std::string> display_name;
  std::optional<std::int64_t> followers;
  std::optional<std::int64_t> friends;
  bool verified = false;
};

struct ParseOutcome {
  std::optional<Post> post;
  std::optional<AuthorProfile> author;
  PostRejection rejection{PostRejection::none};
  std::string detail;

  explicit operator bool() const { return post.has_value(); }
};

namespace detail {

inline ParseOutcome reject(PostRejection r, std::string detail) { return {std::nullopt, std::nullopt, r, std::move(detail)}; }

inline std::optional<Timestamp> timestamp_from_json(const json& v) {
  if (v.is_number_integer()) return v.get<Timestamp>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) return std::nullopt;
    return static_cast<Timestamp>(d);
  }
  if (v.is_string()) return parse_iso8601_utc(v.get<std::string>());
  return std::nullopt;
}

inline std::optional<std::int64_t> count_from_json(const json& obj, std::initializer_list<const char*> names,
                                                   bool& bad) {
  for (const char* name : names) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) continue;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      bad = true;
      return std::nullopt;
    }
    return it->get<std::int64_t>();
  }
  return std::nullopt;
}

inline std::optional<std::string> optional_string(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace detail

// One input record. Unknown fields are ignored; "phones" is never trusted
// from input, extraction fills it later. Facebook reactions fold into likes.
inline ParseOutcome parse_post_record(const json& record) {
  using detail::reject;
  if (!record.is_object()) return reject(PostRejection::malformed_json, "record is not an object");

  for (const char* field : {"post_id", "platform", "author", "timestamp", "text"}) {
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return reject(PostRejection::missing_required_field, field);
  }
  const auto& pid = record["post_id"];
  if (!pid.is_string() && !pid.is_number_integer()) return reject(PostRejection::invalid_field, "post_id");
  Post post;
  post.post_id = pid.is_string() ? pid.get<std::string>() : std::to_string(pid.get<std::int64_t>());
  if (post.post_id.empty()) return reject(PostRejection::missing_required_field, "post_id");

  if (!record["platform"].is_string()) return reject(PostRejection::unknown_platform, record["platform"].dump());
  const auto platform = parse_platform(record["platform"].get<std::string>());
  if (!platform) return reject(PostRejection::unknown_platform, record["platform"].get<std::string>());
  post.platform = *platform;

  std::optional<AuthorProfile> profile;
  const auto& author = record["author"];
  if (author.is_string()) {
    post.author = author.get<std::string>();
  } else if (author.is_object()) {
    auto uid = author.find("user_id");
    if (uid == author.end() || !(uid->is_string() || uid->is_number_integer()))
      return reject(PostRejection::missing_required_field, "author.user_id");
    post.author = uid->is_string() ? uid->get<std::string>() : std::to_string(uid->get<std::int64_t>());
    AuthorProfile ap;
    ap.screen_name = detail::optional_string(author, "screen_name");
    ap.display_name = detail::optional_string(author, "display_name");
    bool bad = false;
    ap.followers = detail::count_from_json(author, {"followers"}, bad);
    ap.friends = detail::count_from_json(author, {"friends"}, bad);
    if (bad) return reject(PostRejection::invalid_field, "author counts");
    ap.verified = author.value("verified", false);
    profile = std::move(ap);
  } else {
    return reject(PostRejection::invalid_field, "author");
  }
  if (post.author.empty()) return reject(PostRejection::missing_required_field, "author");

  const auto ts = detail::timestamp_from_json(record["timestamp"]);
  if (!ts || *ts <= 0) return reject(PostRejection::bad_timestamp, record["timestamp"].dump());
  post.timestamp = *ts;

  if (!record["text"].is_string()) return reject(PostRejection::invalid_field, "text");
  post.text = record["text"].get<std::string>();

  if (auto it = record.find("urls"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) return reject(PostRejection::invalid_field, "urls");
    for (const auto& u : *it) {
      if (!u.is_string()) return reject(PostRejection::invalid_field, "urls");
      post.urls.push_back(u.get<std::string>());
    }
  }

  if (auto it = record.find("engagement"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) return reject(PostRejection::invalid_field, "engagement");
    bool bad = false;
    post.engagement.likes = detail::count_from_json(*it, {"likes", "plus_ones"}, bad).value_or(0);
    post.engagement.shares =
        detail::count_from_json(*it, {"shares", "shares_or_retweets_or_reshares", "retweets", "reshares"}, bad)
            .value_or(0);
    post.engagement.reactions = detail::count_from_json(*it, {"reactions"}, bad).value_or(0);
    post.engagement.views = detail::count_from_json(*it, {"views"}, bad).value_or(0);
    if (bad) return reject(PostRejection::invalid_field, "engagement");
    if (post.platform == Platform::FB) post.engagement.likes += post.engagement.reactions;
  }

  post.client = detail::optional_string(record, "client");
  post.language = detail::optional_string(record, "language");
  if (!post.language) post.language = detail::optional_string(record, "lang");
  if (auto it = record.find("has_photo"); it != record.end() && !it->is_null()) {
    if (!it->is_boolean()) return reject(PostRejection::invalid_field, "has_photo");
    post.has_photo = it->get<bool>();
  }
  return {std::move(post), std::move(profile), PostRejection::none, {}};
}

inline ParseOutcome parse_post_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& ex) {
    return detail::reject(PostRejection::malformed_json, ex.what());
  }
  return parse_post_record(j);
}

// Extraction result assigned to a post: unique canonicals, first-seen order.
inline void attach_phones(Post& post, const CountryTable& table, const ExtractOptions& opts = {}) {
  post.phones.clear();
  for (auto& m : extract_phone_numbers(post.text, table, opts)) {
    if (!post.has_phone(m.phone.canonical)) post.phones.push_back(std::move(m.phone));
  }
}

// ---------------------------------------------------------------------------
// Corpus

struct IngestSummary {
  std::string source;
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t filtered_no_phone = 0;
  std::size_t duplicates = 0;
  std::size_t malformed = 0;
  std::map<std::string, std::size_t> rejection_reasons;

  bool balanced() const { return read == kept + filtered_no_phone + duplicates + malformed; }
};

inline json to_json(const IngestSummary& s) {
  return {{"source", s.source},       {"read", s.read},
          {"kept", s.kept},           {"filtered_no_phone", s.filtered_no_phone},
          {"duplicates", s.duplicates}, {"malformed", s.malformed},
          {"rejection_reasons", s.rejection_reasons}};
}

struct SnapshotSummary {
  std::string source;
  std::size_t read = 0;
  std::size_t updated = 0;
  std::size_t unchanged = 0;  // identical observation already recorded
  std::size_t unknown_account = 0;
  std::size_t malformed = 0;
};

inline json to_json(const SnapshotSummary& s) {
  return {{"source", s.source},   {"read", s.read},       {"updated", s.updated},
          {"unchanged", s.unchanged}, {"unknown_account", s.unknown_account}, {"malformed", s.malformed}};
}

struct IngestConfig {
  CountryTable table = CountryTable::bundled();
  std::vector<std::string> keywords = default_keywords();
  ExtractOptions extract{};
};

// Single writer; concurrent readers must hold a const reference to a corpus
// that is no longer being written.
class Corpus {
 public:
  explicit Corpus(IngestConfig config = {}) : config_(std::move(config)) {}

  // Opens (creating if needed) a persistent corpus in `dir` and replays its logs.
  static Corpus open(const std::string& dir, IngestConfig config = {}) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
    Corpus c(std::move(config));
    c.replay(dir);
    c.dir_ = dir;
    return c;
  }

  const IngestConfig& config() const { return config_; }
  const std::map<PostKey, Post>& posts() const { return posts_; }
  const std::map<AccountKey, Account>& accounts() const { return accounts_; }
  const std::vector<IngestSummary>& ingest_log() const { return ingest_log_; }
  const std::optional<std::string>& directory() const { return dir_; }

  const Post* find_post(const PostKey& k) const {
    auto it = posts_.find(k);
    return it == posts_.end() ? nullptr : &it->second;
  }
  const Account* find_account(const AccountKey& k) const {
    auto it = accounts_.find(k);
    return it == accounts_.end() ? nullptr : &it->second;
  }

  IngestSummary ingest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    return ingest_stream(in, path);
  }

  // JSON Lines: parse -> extract -> keyword/noise filter -> dedupe by key.
  IngestSummary ingest_stream(std::istream& in, const std::string& source) {
    IngestSummary s;
    s.source = source;
    std::vector<json> post_log, account_log;
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      ++s.read;
      auto parsed = parse_post_line(line);
      if (!parsed) {
        ++s.malformed;
        ++s.rejection_reasons[to_string(parsed.rejection)];
        continue;
      }
      Post& post = *parsed.post;
      attach_phones(post, config_.table, config_.extract);
      if (post.phones.empty() || !keyword_filter(post, config_.keywords)) {
        ++s.filtered_no_phone;
        continue;
      }
      if (posts_.count(post.key()) > 0) {
        ++s.duplicates;
        continue;
      }
      ++s.kept;
      if (dir_) {
        json stored = to_json(post);
        stored["phones"] = json::array();
        for (const auto& ph : post.phones) stored["phones"].push_back(to_json(ph));
        post_log.push_back(std::move(stored));
      }
      json account_event = author_event(post, parsed.author);
      apply_account_event(account_event);
      if (dir_) account_log.push_back(std::move(account_event));
      auto key = post.key();
      posts_.emplace(std::move(key), std::move(post));
    }
    if (dir_) {
      append_lines("posts.jsonl", post_log);
      append_lines("accounts.jsonl", account_log);
      append_lines("ingest_log.jsonl", {to_json(s)});
    }
    ingest_log_.push_back(s);
    return s;
  }

  SnapshotSummary snapshot_accounts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    return snapshot_stream(in, path);
  }

  // Records {platform, user_id, status, checked_at}. The latest checked_at
  // decides the current status; every observation stays in the history.
  SnapshotSummary snapshot_stream(std::istream& in, const std::string& source) {
    SnapshotSummary s;
    s.source = source;
    std::vector<json> log;
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      ++s.read;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        ++s.malformed;
        continue;
      }
      const auto rec = status_record(j);
      if (!rec) {
        ++s.malformed;
        continue;
      }
      auto it = accounts_.find(rec->first);
      if (it == accounts_.end()) {
        ++s.unknown_account;
        continue;
      }
      if (apply_status(it->second, rec->second)) {
        ++s.updated;
        if (dir_) log.push_back(j);
      } else {
        ++s.unchanged;
      }
    }
    if (dir_) append_lines("statuses.jsonl", log);
    return s;
  }

 private:
  static std::optional<std::pair<AccountKey, StatusObservation>> status_record(const json& j) {
    if (!j.is_object()) return std::nullopt;
    auto pf = j.find("platform");
    auto uid = j.find("user_id");
    auto st = j.find("status");
    auto at = j.find("checked_at");
    if (pf == j.end() || uid == j.end() || st == j.end() || at == j.end()) return std::nullopt;
    if (!pf->is_string() || !st->is_string() || !(uid->is_string() || uid->is_number_integer())) return std::nullopt;
    const auto platform = parse_platform(pf->get<std::string>());
    const auto status = parse_account_status(st->get<std::string>());
    const auto checked = detail::timestamp_from_json(*at);
    if (!platform || !status || !checked) return std::nullopt;
    AccountKey key{*platform, uid->is_string() ? uid->get<std::string>() : std::to_string(uid->get<std::int64_t>())};
    return std::make_pair(std::move(key), StatusObservation{*status, *checked});
  }

  static bool apply_status(Account& a, const StatusObservation& obs) {
    auto& h = a.status_history;
    for (const auto& e : h)
      if (e.checked_at == obs.checked_at && e.status == obs.status) return false;
    auto pos = std::upper_bound(h.begin(), h.end(), obs.checked_at,
                                [](Timestamp t, const StatusObservation& e) { return t < e.checked_at; });
    h.insert(pos, obs);
    a.status = h.back().status;
    a.status_checked_at = h.back().checked_at;
    return true;
  }

  static json author_event(const Post& post, const std::optional<AuthorProfile>& profile) {
    json ev{{"platform", to_string(post.platform)}, {"user_id", post.author}, {"observed_at", post.timestamp}};
    if (profile) {
      if (profile->screen_name) ev["screen_name"] = *profile->screen_name;
      if (profile->display_name) ev["display_name"] = *profile->display_name;
      if (profile->followers) ev["followers"] = *profile->followers;
      if (profile->friends) ev["friends"] = *profile->friends;
      ev["verified"] = profile->verified;
    }
    return ev;
  }

  // Profile fields follow the newest observation; "verified" is sticky.
  void apply_account_event(const json& ev) {
    const auto platform = parse_platform(ev.at("platform").get<std::string>());
    if (!platform) return;
    AccountKey key{*platform, ev.at("user_id").get<std::string>()};
    const Timestamp observed = ev.value("observed_at", Timestamp{0});
    auto [it, created] = accounts_.try_emplace(key);
    Account& a = it->second;
    if (created) {
      a.platform = key.platform;
      a.user_id = key.user_id;
      a.display_name = key.user_id;
    }
    if (ev.value("verified", false)) a.verified = true;
    if (!created && observed < a.profile_observed_at) return;
    a.profile_observed_at = observed;
    if (auto sn = detail::optional_string(ev, "screen_name")) a.screen_name = *sn;
    if (auto dn = detail::optional_string(ev, "display_name"); dn && !trim(*dn).empty())
      a.display_name = *dn;
    else if (created && a.screen_name)
      a.display_name = *a.screen_name;
    if (ev.contains("followers")) a.followers = ev["followers"].get<std::int64_t>();
    if (ev.contains("friends")) a.friends = ev["friends"].get<std::int64_t>();
  }

  static std::vector<std::string> log_lines(const std::filesystem::path& p) {
    std::vector<std::string> out;
    if (!std::filesystem::exists(p)) return out;
    std::istringstream in(read_file(p.string()));
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) out.push_back(line);
    return out;
  }

  void replay(const std::string& dir) {
    const std::filesystem::path root(dir);
    for (const auto& line : log_lines(root / "posts.jsonl")) {
      const json j = json::parse(line);
      auto parsed = parse_post_record(j);
      if (!parsed) throw Error(ErrorCode::io_error, "corrupt posts.jsonl record: " + parsed.detail);
      Post post = std::move(*parsed.post);
      if (post.platform == Platform::FB) post.engagement.likes -= post.engagement.reactions;  // stored folded
      for (const auto& ph : j.at("phones")) {
        const auto canonical = ph.is_string() ? ph.get<std::string>() : ph.at("canonical").get<std::string>();
        const bool intl = ph.is_object() && ph.value("international_prefix", false);
        auto norm = normalize_phone(intl ? "+" + canonical : canonical, config_.table, config_.extract.limits);
        if (norm) post.phones.push_back(std::move(*norm.phone));
      }
      auto key = post.key();
      posts_.insert_or_assign(std::move(key), std::move(post));
    }
    for (const auto& line : log_lines(root / "accounts.jsonl")) apply_account_event(json::parse(line));
    for (const auto& line : log_lines(root / "statuses.jsonl")) {
      if (auto rec = status_record(json::parse(line))) {
        auto it = accounts_.find(rec->first);
        if (it != accounts_.end()) apply_status(it->second, rec->second);
      }
    }
    for (const auto& line : log_lines(root / "ingest_log.jsonl")) {
      const json j = json::parse(line);
      IngestSummary s;
      s.source = j.value("source", "");
      s.read = j.value("read", std::size_t{0});
      s.kept = j.value("kept", std::size_t{0});
      s.filtered_no_phone = j.value("filtered_no_phone", std::size_t{0});
      s.duplicates = j.value("duplicates", std::size_t{0});
      s.malformed = j.value("malformed", std::size_t{0});
      ingest_log_.push_back(std::move(s));
    }
  }

  void append_lines(const char* file, const std::vector<json>& lines) const {
    if (lines.empty()) return;
    const auto path = (std::filesystem::path(*dir_) / file).string();
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::io_error, "cannot append to " + path);
    for (const auto& j : lines) out << j.dump() << '\n';
  }

  IngestConfig config_;
  std::map<PostKey, Post> posts_;
  std::map<AccountKey, Account> accounts_;
  std::vector<IngestSummary> ingest_log_;
  std::optional<std::string> dir_;
};

}  // namespace phonespam
