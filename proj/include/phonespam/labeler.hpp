#pragma once

// Spam flagging rules, the verified-account phone filter, the volume cut for
// characterization, and the human review labels recorded from triage.

#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/cluster.hpp"
#include "phonespam/ingest.hpp"

namespace phonespam {

// Do-Not-Call list: one canonical phone per line, '#' starts a comment.
struct DncList {
  std::set<std::string> phones;
  std::string source;
  Timestamp loaded_at = 0;
  std::size_t rejected_entries = 0;

  static DncList load(const std::string& path, const CountryTable& table = CountryTable::bundled()) {
    DncList d;
    d.source = path;
    d.loaded_at = static_cast<Timestamp>(std::time(nullptr));
    for (const auto& line : read_list_file(path)) {
      if (auto n = normalize_phone(line, table))
        d.phones.insert(n.phone->canonical);
      else
        ++d.rejected_entries;
    }
    return d;
  }

  // NANP numbers are also matched without their leading 1.
  bool contains(const PhoneNumber& p) const {
    if (phones.count(p.canonical) > 0) return true;
    return p.country_code == 1 && p.canonical.size() == 11 && phones.count(p.canonical.substr(1)) > 0;
  }
};

// Phones that appear in any post by a verified account.
inline std::set<std::string> filter_verified_phones(const Corpus& corpus) {
  std::set<std::string> out;
  for (const auto& [key, post] : corpus.posts()) {
    const auto* author = corpus.find_account(post.author_key());
    if (author == nullptr || !author->verified) continue;
    for (const auto& ph : post.phones) out.insert(ph.canonical);
  }
  return out;
}

enum class FlagReasonKind { dnc_phone, suspended_account };

inline const char* to_string(FlagReasonKind k) {
  return k == FlagReasonKind::dnc_phone ? "dnc_phone" : "suspended_account";
}

struct FlagReason {
  FlagReasonKind kind;
  std::string subject;  // phone canonical or "PLATFORM:user_id"
};

struct SpamFlag {
  bool auto_flag = false;
  std::vector<FlagReason> reasons;
};

inline nlohmann::json to_json(const SpamFlag& f) {
  auto reasons = nlohmann::json::array();
  for (const auto& r : f.reasons) reasons.push_back({{"kind", to_string(r.kind)}, {"subject", r.subject}});
  return {{"auto_flag", f.auto_flag}, {"reasons", std::move(reasons)}};
}

// Flagged iff a campaign phone is on the DNC list or any campaign account is
// suspended.
inline SpamFlag flag_spam(const Campaign& campaign, const DncList& dnc, const Corpus& corpus) {
  SpamFlag f;
  for (const auto& p : campaign.phones)
    if (dnc.contains(p)) f.reasons.push_back({FlagReasonKind::dnc_phone, p.canonical});
  for (const auto& u : campaign.user_ids) {
    const auto* a = corpus.find_account(u);
    if (a != nullptr && a->status == AccountStatus::suspended)
      f.reasons.push_back({FlagReasonKind::suspended_account, to_string(u)});
  }
  f.auto_flag = !f.reasons.empty();
  return f;
}

inline bool eligible_for_characterization(const Campaign& campaign, const Thresholds& thr) {
  return static_cast<std::int64_t>(campaign.post_ids.size()) >= thr.min_campaign_posts;
}

// Topics seen during manual campaign review; the vocabulary stays open.
inline const std::vector<std::string>& seed_topics() {
  static const std::vector<std::string> t = {"Party Reservations",
                                             "Pornography",
                                             "Delivering Goods",
                                             "Hotel Booking",
                                             "Alternating Beliefs",
                                             "Product Marketing",
                                             "Hacking (Tech Support)",
                                             "Purchasing Followers",
                                             "Finance, Real Estate",
                                             "Selling Adult Products",
                                             "Charity (Donation)",
                                             "Escorts",
                                             "Free Games, Downloads",
                                             "Uncategorized"};
  return t;
}

// ---------------------------------------------------------------------------
// Review labels

struct ReviewLabel {
  std::string campaign_id;
  CampaignLabel verdict = CampaignLabel::spam;  // spam or benign
  std::string topic;
  std::string reviewer;
  Timestamp reviewed_at = 0;

  bool same_decision(const ReviewLabel& o) const {
    return campaign_id == o.campaign_id && verdict == o.verdict && topic == o.topic && reviewer == o.reviewer;
  }
};

inline nlohmann::json to_json(const ReviewLabel& l) {
  return {{"campaign_id", l.campaign_id},
          {"verdict", to_string(l.verdict)},
          {"topic", l.topic},
          {"reviewer", l.reviewer},
          {"reviewed_at", l.reviewed_at}};
}

inline ReviewLabel review_label_from_json(const nlohmann::json& j) {
  ReviewLabel l;
  try {
    l.campaign_id = j.at("campaign_id").get<std::string>();
    const auto v = parse_campaign_label(j.at("verdict").get<std::string>());
    if (!v || *v == CampaignLabel::unreviewed)
      throw Error(ErrorCode::invalid_config, "verdict must be spam or benign");
    l.verdict = *v;
    l.topic = j.value("topic", std::string{});
    l.reviewer = j.value("reviewer", std::string{});
    l.reviewed_at = j.value("reviewed_at", Timestamp{0});
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_config, std::string("review label: ") + ex.what());
  }
  return l;
}

// Append-only label history per campaign. The last entry is the active label.
class ReviewLog {
 public:
  ReviewLog() = default;

  // Persistent log in `path` (JSON Lines), replayed on construction.
  explicit ReviewLog(std::string path) : path_(std::move(path)) {
    if (!std::filesystem::exists(*path_)) return;
    std::istringstream in(read_file(*path_));
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) {
        auto l = review_label_from_json(nlohmann::json::parse(line));
        history_[l.campaign_id].push_back(std::move(l));
      }
  }

  // Returns false when the submission repeats the active decision.
  bool append(const ReviewLabel& label) {
    auto& h = history_[label.campaign_id];
    if (!h.empty() && h.back().same_decision(label)) return false;
    h.push_back(label);
    if (path_) {
      std::ofstream out(*path_, std::ios::binary | std::ios::app);
      if (!out) throw Error(ErrorCode::io_error, "cannot append to " + *path_);
      out << to_json(label).dump() << '\n';
    }
    return true;
  }

  const ReviewLabel* active(const std::string& campaign_id) const {
    auto it = history_.find(campaign_id);
    return (it == history_.end() || it->second.empty()) ? nullptr : &it->second.back();
  }

  std::vector<ReviewLabel> history(const std::string& campaign_id) const {
    auto it = history_.find(campaign_id);
    return it == history_.end() ? std::vector<ReviewLabel>{} : it->second;
  }

  std::size_t total_entries() const {
    std::size_t n = 0;
    for (const auto& [id, h] : history_) n += h.size();
    return n;
  }

  // Overlays active labels onto campaigns.
  void apply_to(std::vector<Campaign>& campaigns) const {
    for (auto& c : campaigns) {
      if (const auto* l = active(c.campaign_id)) {
        c.label = l->verdict;
        c.topic = l->topic.empty() ? std::nullopt : std::optional<std::string>(l->topic);
      }
    }
  }

 private:
  std::optional<std::string> path_;
  std::map<std::string, std::vector<ReviewLabel>> history_;
};

inline Campaign apply_review_label(std::vector<Campaign>& campaigns, ReviewLog& log, const ReviewLabel& label) {
  auto it = std::find_if(campaigns.begin(), campaigns.end(),
                         [&](const Campaign& c) { return c.campaign_id == label.campaign_id; });
  if (it == campaigns.end()) throw Error(ErrorCode::unknown_campaign, label.campaign_id);
  if (label.verdict == CampaignLabel::unreviewed)
    throw Error(ErrorCode::invalid_config, "verdict must be spam or benign");
  log.append(label);
  const auto* active = log.active(label.campaign_id);
  it->label = active->verdict;
  it->topic = active->topic.empty() ? std::nullopt : std::optional<std::string>(active->topic);
  return *it;
}

}  // namespace phonespam
