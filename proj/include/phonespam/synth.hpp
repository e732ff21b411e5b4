#pragma once

// Seeded synthetic multi-platform corpora with planted campaigns, their ground
// truth, and pairwise/ARI scoring of a clustering against that truth.

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/cluster.hpp"
#include "phonespam/common.hpp"
#include "phonespam/phone.hpp"

namespace phonespam {

struct SynthCampaign {
  std::string id;
  std::size_t phone_count = 3;
  std::size_t account_count = 20;  // accounts per platform
  std::size_t post_count = 500;
  std::vector<std::string> vocabulary;  // >= core_size + 1 tokens
  std::size_t core_size = 10;           // tokens present in every post
  PerPlatform<double> platform_mix{1.0, 0.0, 0.0, 0.0, 0.0};
  std::optional<Platform> start_platform;  // every phone debuts here
  double posting_rate = 300;               // mean gap, seconds
  Timestamp start_offset = 0;              // seconds after SynthSpec::start
  int calling_code = 1;
  std::optional<std::string> language;
  PerPlatform<double> suspension_fraction{};
  Timestamp suspension_delay = 86400;  // status check time after the last post
  double mean_likes = 5;
  double mean_shares = 2;
  double collusion_rate = 0;  // share of engagement actions by campaign accounts
  double cross_reference_rate = 0;
  double hashtag_rate = 0;
  double photo_rate = 0;
  double bot_client_rate = 0;  // Twitter posts sent via "twittbot.net"
};

struct SynthSpec {
  std::uint64_t seed = 1;
  Timestamp start = 1461542400;  // 2016-04-25T00:00:00Z
  std::vector<SynthCampaign> campaigns;
  std::size_t phoneless_noise = 0;
  std::size_t benign_phone_noise = 0;
  bool emit_engagement_actors = true;

  void validate() const {
    auto rate = [](double v, const std::string& what) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_spec, what + " must be in [0,1]");
    };
    std::set<std::string> ids;
    for (const auto& c : campaigns) {
      if (c.id.empty() || !ids.insert(c.id).second) throw Error(ErrorCode::invalid_spec, "campaign ids must be unique");
      if (c.phone_count == 0 || c.account_count == 0) throw Error(ErrorCode::invalid_spec, c.id + ": empty campaign");
      if (c.post_count < c.phone_count) throw Error(ErrorCode::invalid_spec, c.id + ": fewer posts than phones");
      if (c.core_size == 0 || c.vocabulary.size() <= c.core_size)
        throw Error(ErrorCode::invalid_spec, c.id + ": vocabulary must exceed core_size");
      const double sum = std::accumulate(c.platform_mix.begin(), c.platform_mix.end(), 0.0);
      if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::invalid_spec, c.id + ": platform_mix must sum to 1");
      for (double w : c.platform_mix)
        if (w < 0.0) throw Error(ErrorCode::invalid_spec, c.id + ": negative platform weight");
      if (c.start_platform && c.platform_mix[index_of(*c.start_platform)] <= 0.0)
        throw Error(ErrorCode::invalid_spec, c.id + ": start_platform has zero weight");
      if (!(c.posting_rate > 0.0) || !(c.mean_likes >= 0.0) || !(c.mean_shares >= 0.0) || c.suspension_delay < 0)
        throw Error(ErrorCode::invalid_spec, c.id + ": rates must be positive");
      for (double f : c.suspension_fraction) rate(f, c.id + ": suspension_fraction");
      rate(c.collusion_rate, c.id + ": collusion_rate");
      rate(c.cross_reference_rate, c.id + ": cross_reference_rate");
      rate(c.hashtag_rate, c.id + ": hashtag_rate");
      rate(c.photo_rate, c.id + ": photo_rate");
      rate(c.bot_client_rate, c.id + ": bot_client_rate");
      if (CountryTable::bundled().find(c.calling_code) == nullptr)
        throw Error(ErrorCode::invalid_spec, c.id + ": calling code not in the bundled table");
    }
  }
};

inline PerPlatform<double> per_platform_from_json(const nlohmann::json& j) {
  PerPlatform<double> out{};
  for (const auto& [k, v] : j.items()) {
    const auto p = parse_platform(k);
    if (!p) throw Error(ErrorCode::invalid_spec, "unknown platform " + k);
    out[index_of(*p)] = v.get<double>();
  }
  return out;
}

// JSON form of SynthSpec; omitted fields keep their defaults.
inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.start = j.value("start", s.start);
    s.phoneless_noise = j.value("phoneless_noise", s.phoneless_noise);
    s.benign_phone_noise = j.value("benign_phone_noise", s.benign_phone_noise);
    s.emit_engagement_actors = j.value("emit_engagement_actors", s.emit_engagement_actors);
    for (const auto& cj : j.at("campaigns")) {
      SynthCampaign c;
      c.id = cj.at("id").get<std::string>();
      c.phone_count = cj.value("phone_count", c.phone_count);
      c.account_count = cj.value("account_count", c.account_count);
      c.post_count = cj.value("post_count", c.post_count);
      c.vocabulary = cj.at("vocabulary").get<std::vector<std::string>>();
      c.core_size = cj.value("core_size", c.core_size);
      if (cj.contains("platform_mix")) c.platform_mix = per_platform_from_json(cj["platform_mix"]);
      if (cj.contains("start_platform")) {
        c.start_platform = parse_platform(cj["start_platform"].get<std::string>());
        if (!c.start_platform) throw Error(ErrorCode::invalid_spec, c.id + ": unknown start_platform");
      }
      c.posting_rate = cj.value("posting_rate", c.posting_rate);
      c.start_offset = cj.value("start_offset", c.start_offset);
      c.calling_code = cj.value("calling_code", c.calling_code);
      if (cj.contains("language")) c.language = cj["language"].get<std::string>();
      if (cj.contains("suspension_fraction")) c.suspension_fraction = per_platform_from_json(cj["suspension_fraction"]);
      c.suspension_delay = cj.value("suspension_delay", c.suspension_delay);
      c.mean_likes = cj.value("mean_likes", c.mean_likes);
      c.mean_shares = cj.value("mean_shares", c.mean_shares);
      c.collusion_rate = cj.value("collusion_rate", c.collusion_rate);
      c.cross_reference_rate = cj.value("cross_reference_rate", c.cross_reference_rate);
      c.hashtag_rate = cj.value("hashtag_rate", c.hashtag_rate);
      c.photo_rate = cj.value("photo_rate", c.photo_rate);
      c.bot_client_rate = cj.value("bot_client_rate", c.bot_client_rate);
      s.campaigns.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_spec, ex.what());
  }
  s.validate();
  return s;
}

struct TruthAccount {
  std::string campaign;
  bool suspended = false;
};

struct GroundTruth {
  std::map<std::string, std::string> post_campaign;  // "PF:post_id" -> campaign id or "noise:<phone>"
  std::map<std::string, std::string> phone_campaign;  // canonical -> campaign id
  std::map<std::string, TruthAccount> accounts;       // "PF:user_id"
  std::size_t phoneless_posts = 0;
  std::size_t emitted_posts = 0;  // every line written, phoneless included
};

inline nlohmann::json to_json(const GroundTruth& t) {
  nlohmann::json accounts = nlohmann::json::object();
  for (const auto& [k, a] : t.accounts) accounts[k] = {{"campaign", a.campaign}, {"suspended", a.suspended}};
  return {{"post_campaign", t.post_campaign},
          {"phone_campaign", t.phone_campaign},
          {"accounts", std::move(accounts)},
          {"phoneless_posts", t.phoneless_posts},
          {"emitted_posts", t.emitted_posts}};
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth t;
  try {
    t.post_campaign = j.at("post_campaign").get<std::map<std::string, std::string>>();
    t.phone_campaign = j.at("phone_campaign").get<std::map<std::string, std::string>>();
    for (const auto& [k, a] : j.at("accounts").items())
      t.accounts[k] = {a.at("campaign").get<std::string>(), a.at("suspended").get<bool>()};
    t.phoneless_posts = j.at("phoneless_posts").get<std::size_t>();
    t.emitted_posts = j.at("emitted_posts").get<std::size_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_spec, std::string("truth file: ") + ex.what());
  }
  return t;
}

struct SynthCorpus {
  std::vector<std::string> posts;     // JSON Lines, post schema
  std::vector<std::string> statuses;  // JSON Lines, account status snapshots
  std::vector<std::string> actors;    // JSON Lines, engagement actors
  GroundTruth truth;
};

namespace synth_detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  std::size_t index(std::size_t n) { return uniform_index(g_(), n); }
  double unit() { return unit_double(g_()); }
  bool chance(double p) { return unit() < p; }
  // Integer in [0, 2*mean], mean `mean`.
  std::int64_t around(double mean) { return static_cast<std::int64_t>(std::floor(unit() * (2.0 * mean + 1.0))); }
  // >= 1, roughly exponential with the given mean.
  std::int64_t gap(double mean) { return 1 + static_cast<std::int64_t>(std::floor(-std::log1p(-unit()) * (mean - 0.5))); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }
  Platform platform(const PerPlatform<double>& mix) {
    double u = unit(), acc = 0.0;
    Platform last = Platform::TW;
    for (auto p : kAllPlatforms) {
      if (mix[index_of(p)] <= 0.0) continue;
      acc += mix[index_of(p)];
      last = p;
      if (u < acc) return p;
    }
    return last;
  }

 private:
  std::mt19937_64 g_;
};

// Pronounceable lowercase word, never a stopword.
inline std::string make_word(Rng& rng, std::size_t syllables) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w.push_back(consonants[rng.index(consonants.size())]);
    w.push_back(vowels[rng.index(vowels.size())]);
  }
  return w;
}

// `n` fresh words not in `used`; the new words are added to `used`.
inline std::vector<std::string> fresh_words(Rng& rng, std::size_t n, std::set<std::string>& used,
                                            std::size_t syllables = 4) {
  std::vector<std::string> out;
  while (out.size() < n) {
    auto w = make_word(rng, syllables);
    if (default_stopwords().count(w) == 0 && used.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

inline std::string digits(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.index(10)));
  return s;
}

// National significant number for the calling code's table entry.
inline std::string national_number(Rng& rng, const CountryEntry& e) {
  const auto len = e.min_len + rng.index(e.max_len - e.min_len + 1);
  std::string prefix;
  if (e.calling_code == 1) {
    prefix = rng.chance(0.5) ? rng.pick(e.toll_free_prefixes) : std::string(1, static_cast<char>('2' + rng.index(8))) + digits(rng, 2);
  } else if (!e.mobile_prefixes.empty()) {
    prefix = rng.pick(e.mobile_prefixes);
  } else {
    prefix = std::string(1, static_cast<char>('2' + rng.index(8)));
  }
  if (prefix.size() >= len) return prefix.substr(0, len);
  // Keep the exchange from starting with 0/1 so NANP numbers stay plausible.
  std::string rest = std::string(1, static_cast<char>('2' + rng.index(8))) + digits(rng, len - prefix.size() - 1);
  return prefix + rest;
}

// Writes calling code + national number in one of the separator styles seen in
// the wild ("1-888-551-2881", "1(888)551-2881", "1 888 551 2881", ...).
inline std::string format_variant(const std::string& cc, const std::string& national, std::size_t variant) {
  const std::string a = national.substr(0, 3);
  const std::string b = national.size() > 7 ? national.substr(3, national.size() - 7) : "";
  const std::string c = national.substr(national.size() - std::min<std::size_t>(4, national.size() - 3));
  auto join = [&](const std::string& sep) {
    std::string s = cc + sep + a;
    if (!b.empty()) s += sep + b;
    return s + sep + c;
  };
  switch (variant % 7) {
    case 0: return join("-");
    case 1: return cc + "(" + a + ")" + (b.empty() ? "" : b + "-") + c;
    case 2: return cc + "(" + a + ") " + (b.empty() ? "" : b + "-") + c;
    case 3: return join(".");
    case 4: return join(" ");
    case 5: return "+" + join(" ");
    default: return cc + national;
  }
}

inline const std::map<Platform, std::string>& platform_link_hosts() {
  static const std::map<Platform, std::string> m = {{Platform::TW, "twitter.com"},
                                                    {Platform::FB, "fb.me"},
                                                    {Platform::GP, "plus.google.com"},
                                                    {Platform::YT, "youtu.be"},
                                                    {Platform::FL, "flic.kr"}};
  return m;
}

struct SynthAccount {
  std::string user_id;
  std::optional<std::string> screen_name;
  std::string display_name;
  std::int64_t followers = 0;
  std::int64_t friends = 0;
};

}  // namespace synth_detail

inline SynthCorpus generate_corpus(const SynthSpec& spec) {
  using namespace synth_detail;
  spec.validate();
  Rng rng(spec.seed);
  SynthCorpus out;
  auto& truth = out.truth;
  std::set<std::string> used_phones, used_words;
  for (const auto& c : spec.campaigns) used_words.insert(c.vocabulary.begin(), c.vocabulary.end());
  std::size_t post_seq = 0;
  auto next_post_id = [&] { return "p" + std::to_string(++post_seq); };

  struct Line {
    Timestamp ts;
    std::size_t seq;
    std::string json;
  };
  std::vector<Line> lines;
  auto emit = [&](nlohmann::json rec) {
    lines.push_back({rec.at("timestamp").get<Timestamp>(), lines.size(), rec.dump()});
  };

  auto new_phone = [&](int calling_code) {
    const auto& e = *CountryTable::bundled().find(calling_code);
    const auto cc = std::to_string(calling_code);
    for (;;) {
      auto national = national_number(rng, e);
      if (used_phones.insert(cc + national).second) return std::make_pair(cc, national);
    }
  };

  for (const auto& c : spec.campaigns) {
    std::vector<std::pair<std::string, std::string>> phones;
    for (std::size_t i = 0; i < c.phone_count; ++i) {
      phones.push_back(new_phone(c.calling_code));
      truth.phone_campaign[phones.back().first + phones.back().second] = c.id;
    }
    const std::vector<std::string> core(c.vocabulary.begin(), c.vocabulary.begin() + static_cast<long>(c.core_size));
    const std::vector<std::string> extras(c.vocabulary.begin() + static_cast<long>(c.core_size), c.vocabulary.end());

    // One identity per account slot; TW/FB carry screen names, GP/YT/FL only display names.
    const auto base_names = fresh_words(rng, c.account_count, used_words, 3);
    std::map<std::pair<Platform, std::size_t>, SynthAccount> accounts;
    auto account = [&](Platform p, std::size_t k) -> const SynthAccount& {
      auto [it, fresh] = accounts.try_emplace({p, k});
      if (fresh) {
        auto& a = it->second;
        a.user_id = c.id + "-" + to_string(p) + "-u" + std::to_string(k);
        const auto& base = base_names[k];
        if (p == Platform::TW) a.screen_name = base + std::to_string(10 + k % 90);
        if (p == Platform::FB) a.screen_name = base + "_" + std::to_string(10 + k % 90);
        a.display_name = base;
        a.display_name[0] = static_cast<char>(a.display_name[0] - 'a' + 'A');
        a.followers = rng.around(200);
        a.friends = rng.around(150);
      }
      return it->second;
    };

    std::vector<bool> phone_seen(c.phone_count, false);
    Timestamp t = spec.start + c.start_offset;
    Timestamp last = t;
    for (std::size_t i = 0; i < c.post_count; ++i) {
      t += rng.gap(c.posting_rate);
      last = t;
      const std::size_t phone_idx = i < c.phone_count ? i : rng.index(c.phone_count);
      Platform platform = rng.platform(c.platform_mix);
      if (!phone_seen[phone_idx] && c.start_platform) platform = *c.start_platform;
      phone_seen[phone_idx] = true;
      const std::size_t k = i < c.account_count ? i : rng.index(c.account_count);
      const auto& acct = account(platform, k);

      std::string text;
      if (rng.chance(c.hashtag_rate)) text += "#" + core[rng.index(core.size())] + " ";
      for (const auto& w : core) text += w + " ";
      text += rng.pick(extras) + " call ";
      const auto& [cc, national] = phones[phone_idx];
      text += format_variant(cc, national, rng.index(7));

      const auto post_id = next_post_id();
      nlohmann::json rec{{"post_id", post_id}, {"platform", to_string(platform)}, {"timestamp", t}, {"text", text}};
      nlohmann::json author{{"user_id", acct.user_id},
                            {"display_name", acct.display_name},
                            {"followers", acct.followers},
                            {"friends", acct.friends}};
      if (acct.screen_name) author["screen_name"] = *acct.screen_name;
      rec["author"] = std::move(author);

      const auto likes = rng.around(c.mean_likes), shares = rng.around(c.mean_shares);
      nlohmann::json eng{{"likes", likes}, {"shares", shares}};
      if (platform == Platform::FL) eng["views"] = rng.around(500);
      rec["engagement"] = std::move(eng);
      if (rng.chance(c.cross_reference_rate)) {
        std::vector<Platform> others;
        for (auto p : kAllPlatforms)
          if (p != platform) others.push_back(p);
        const auto target = rng.pick(others);
        rec["urls"] = {"https://" + platform_link_hosts().at(target) + "/" + make_word(rng, 3)};
      }
      if (rng.chance(c.photo_rate)) rec["has_photo"] = true;
      if (platform == Platform::TW) rec["client"] = rng.chance(c.bot_client_rate) ? "twittbot.net" : "web";
      if (c.language) rec["language"] = *c.language;

      if (spec.emit_engagement_actors) {
        const std::array<std::pair<const char*, std::int64_t>, 2> acts{{{"like", likes}, {"share", shares}}};
        for (const auto& [action, n] : acts)
          for (std::int64_t a = 0; a < n; ++a) {
            const std::string actor = rng.chance(c.collusion_rate)
                                          ? account(platform, rng.index(c.account_count)).user_id
                                          : "fan-" + std::to_string(rng.index(100000));
            out.actors.push_back(nlohmann::json{{"platform", to_string(platform)},
                                                {"post_id", post_id},
                                                {"actor_user_id", actor},
                                                {"action", action}}
                                     .dump());
          }
      }
      truth.post_campaign[std::string(to_string(platform)) + ":" + post_id] = c.id;
      emit(std::move(rec));
    }

    for (const auto& [pk, a] : accounts) {
      const bool suspended = rng.chance(c.suspension_fraction[index_of(pk.first)]);
      truth.accounts[std::string(to_string(pk.first)) + ":" + a.user_id] = {c.id, suspended};
      out.statuses.push_back(nlohmann::json{{"platform", to_string(pk.first)},
                                            {"user_id", a.user_id},
                                            {"status", suspended ? "suspended" : "active"},
                                            {"checked_at", last + c.suspension_delay}}
                                 .dump());
    }
  }

  // Background noise: unrelated chatter, with and without a phone.
  std::vector<std::string> noise_vocab;
  if (spec.phoneless_noise + spec.benign_phone_noise > 0) noise_vocab = fresh_words(rng, 300, used_words);
  auto noise_text = [&] {
    std::string text;
    for (int i = 0; i < 8; ++i) text += rng.pick(noise_vocab) + " ";
    return text;
  };
  auto noise_record = [&](std::string text, std::size_t n) {
    const auto platform = kAllPlatforms[rng.index(kAllPlatforms.size())];
    const auto post_id = next_post_id();
    nlohmann::json rec{{"post_id", post_id},
                       {"platform", to_string(platform)},
                       {"timestamp", spec.start + static_cast<Timestamp>(rng.index(180 * 86400))},
                       {"text", std::move(text)},
                       {"author", "noise-" + std::to_string(n)}};
    return std::make_pair(std::string(to_string(platform)) + ":" + post_id, rec);
  };
  for (std::size_t i = 0; i < spec.benign_phone_noise; ++i) {
    const auto [cc, national] = new_phone(i % 2 == 0 ? 1 : 62);
    auto [key, rec] = noise_record(noise_text() + "call " + format_variant(cc, national, rng.index(7)), i);
    truth.post_campaign[key] = "noise:" + cc + national;
    truth.phone_campaign[cc + national] = "noise:" + cc + national;
    emit(std::move(rec));
  }
  for (std::size_t i = 0; i < spec.phoneless_noise; ++i) {
    auto [key, rec] = noise_record(noise_text(), spec.benign_phone_noise + i);
    ++truth.phoneless_posts;
    emit(std::move(rec));
  }

  std::sort(lines.begin(), lines.end(),
            [](const Line& a, const Line& b) { return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq; });
  for (auto& l : lines) out.posts.push_back(std::move(l.json));
  truth.emitted_posts = out.posts.size();
  return out;
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  write_file(path.string(), s);
}

// posts.jsonl, statuses.jsonl, engagement_actors.jsonl, truth.json
inline void write_synth_corpus(const SynthCorpus& c, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir);
  const std::filesystem::path root(dir);
  write_lines(root / "posts.jsonl", c.posts);
  write_lines(root / "statuses.jsonl", c.statuses);
  write_lines(root / "engagement_actors.jsonl", c.actors);
  write_file((root / "truth.json").string(), to_json(c.truth).dump(1) + "\n");
}

// `campaigns` planted campaigns with 20-token vocabularies. `overlap` is the
// share of each vocabulary drawn from a pool common to all campaigns.
inline SynthSpec make_planted_spec(std::size_t campaigns, std::size_t phones, std::size_t posts, double overlap,
                                   std::uint64_t seed) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw Error(ErrorCode::invalid_spec, "overlap must be in [0,1]");
  synth_detail::Rng rng(seed ^ 0xC0FFEEu);
  constexpr std::size_t kVocab = 20;
  const auto shared_n = static_cast<std::size_t>(std::llround(overlap * kVocab));
  std::set<std::string> used;
  const auto pool = synth_detail::fresh_words(rng, std::max<std::size_t>(kVocab / 2, shared_n), used);
  SynthSpec spec;
  spec.seed = seed;
  for (std::size_t i = 0; i < campaigns; ++i) {
    SynthCampaign c;
    c.id = "planted-" + std::to_string(i);
    c.phone_count = phones;
    c.post_count = posts;
    auto shared = pool;
    rng.shuffle(shared);
    shared.resize(shared_n);
    c.vocabulary = synth_detail::fresh_words(rng, kVocab - shared_n, used);
    c.vocabulary.insert(c.vocabulary.end(), shared.begin(), shared.end());
    rng.shuffle(c.vocabulary);
    c.platform_mix = {0.4, 0.25, 0.15, 0.1, 0.1};
    c.start_platform = Platform::TW;
    c.calling_code = i % 2 == 0 ? 1 : 62;
    c.start_offset = static_cast<Timestamp>(i) * 3600;
    spec.campaigns.push_back(std::move(c));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Evaluation

struct ClusteringScores {
  std::size_t items = 0;
  std::uint64_t true_positive_pairs = 0;  // co-clustered in both
  std::uint64_t predicted_pairs = 0;
  std::uint64_t truth_pairs = 0;
  double precision = 1.0;  // 1 when no predicted pairs
  double recall = 1.0;     // 1 when no true pairs
  double f1 = 1.0;
  double ari = 1.0;
  // ARI as an exact ratio: ari = ari_num / ari_den (den 0 means the
  // degenerate case resolved to 1 or 0).
  __int128 ari_num = 0;
  __int128 ari_den = 0;
};

inline nlohmann::json to_json(const ClusteringScores& s) {
  return {{"items", s.items},         {"true_positive_pairs", s.true_positive_pairs},
          {"predicted_pairs", s.predicted_pairs}, {"truth_pairs", s.truth_pairs},
          {"precision", s.precision}, {"recall", s.recall},
          {"f1", s.f1},               {"ari", s.ari}};
}

inline std::uint64_t pairs_of(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

// Both maps key items (e.g. "TW:p1") to cluster labels and must cover the same items.
inline ClusteringScores evaluate_clustering(const std::map<std::string, std::string>& predicted,
                                            const std::map<std::string, std::string>& truth) {
  if (predicted.size() != truth.size() ||
      !std::equal(predicted.begin(), predicted.end(), truth.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; }))
    throw Error(ErrorCode::id_mismatch, "predicted and truth cover different items");
  std::map<std::string, std::uint64_t> a, b;
  std::map<std::pair<std::string, std::string>, std::uint64_t> cells;
  auto t = truth.begin();
  for (const auto& [item, label] : predicted) {
    ++a[label];
    ++b[t->second];
    ++cells[{label, t->second}];
    ++t;
  }
  ClusteringScores s;
  s.items = predicted.size();
  for (const auto& [k, n] : cells) s.true_positive_pairs += pairs_of(n);
  for (const auto& [k, n] : a) s.predicted_pairs += pairs_of(n);
  for (const auto& [k, n] : b) s.truth_pairs += pairs_of(n);
  if (s.predicted_pairs > 0) s.precision = static_cast<double>(s.true_positive_pairs) / static_cast<double>(s.predicted_pairs);
  if (s.truth_pairs > 0) s.recall = static_cast<double>(s.true_positive_pairs) / static_cast<double>(s.truth_pairs);
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;

  // ARI = (index - expected) / (max - expected), scaled by 2*C(n,2) to stay integral.
  const __int128 n2 = pairs_of(s.items);
  const __int128 sa = s.predicted_pairs, sb = s.truth_pairs, idx = s.true_positive_pairs;
  s.ari_num = 2 * idx * n2 - 2 * sa * sb;
  s.ari_den = (sa + sb) * n2 - 2 * sa * sb;
  if (s.ari_den == 0)
    s.ari = (s.ari_num == 0 && sa == sb && sa == idx) ? 1.0 : 0.0;
  else
    s.ari = static_cast<double>(s.ari_num) / static_cast<double>(s.ari_den);
  return s;
}

// Predicted labels per post: the campaign id, or a singleton label for posts
// outside every campaign.
inline std::map<std::string, std::string> predicted_labels(const ClusteringResult& r) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < r.docs.size(); ++i) {
    const auto c = r.partition.doc_campaign[i];
    const auto key = to_string(r.docs[i].key);
    out[key] = c >= 0 ? r.partition.campaigns[static_cast<std::size_t>(c)].campaign_id : "unclustered:" + key;
  }
  return out;
}

}  // namespace phonespam
