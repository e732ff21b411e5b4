#pragma once

// End-to-end run: ingest -> extract -> verified filter -> profile -> assign ->
// merge -> auto-flag -> metrics -> identities, and the exported report.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/cluster.hpp"
#include "phonespam/identity.hpp"
#include "phonespam/ingest.hpp"
#include "phonespam/labeler.hpp"
#include "phonespam/metrics.hpp"

namespace phonespam {

struct PipelineInputs {
  std::vector<std::string> post_files;
  std::vector<std::string> status_files;
  std::optional<std::string> dnc_path;
  std::optional<std::string> blacklist_path;
  std::optional<std::string> actors_path;
  Platform savings_seed = Platform::TW;
};

struct StageTiming {
  std::string stage;
  double millis = 0;
};

struct CampaignRecord {
  Campaign campaign;
  CountryProvenance origin_provenance = CountryProvenance::unknown;
  SpamFlag flag;
  bool eligible = false;  // meets min_campaign_posts
  std::vector<std::string> top_tokens;
  CampaignMetrics metrics;
  IdentityMatchResult identities;
};

struct PipelineRun {
  std::string run_id;
  Thresholds config;
  std::vector<StageTiming> timings;
  std::vector<std::pair<std::string, std::string>> input_digests;  // (path, fnv1a hex of contents)
  std::map<std::string, std::size_t> counts;
  std::vector<CampaignRecord> campaigns;  // ascending campaign_id
  IdentitySuspension identity_suspension;
  std::optional<SavingsEstimate> savings;
  std::size_t corpus_posts = 0;
  std::size_t corpus_accounts = 0;

  const CampaignRecord* find(std::string_view id) const {
    auto it = std::lower_bound(campaigns.begin(), campaigns.end(), id,
                               [](const CampaignRecord& r, std::string_view v) { return r.campaign.campaign_id < v; });
    return it != campaigns.end() && it->campaign.campaign_id == id ? &*it : nullptr;
  }
  CampaignRecord* find(std::string_view id) { return const_cast<CampaignRecord*>(std::as_const(*this).find(id)); }
};

inline nlohmann::json run_summary_json(const PipelineRun& r) {
  auto timings = nlohmann::json::array();
  for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"millis", t.millis}});
  auto digests = nlohmann::json::array();
  for (const auto& [path, d] : r.input_digests) digests.push_back({{"path", path}, {"fnv1a", d}});
  return {{"run_id", r.run_id},      {"config", to_json(r.config)}, {"stage_timings", std::move(timings)},
          {"inputs", std::move(digests)}, {"counts", r.counts},     {"campaigns", r.campaigns.size()}};
}

// Campaign origin: majority country over (post, phone) pairs, calling code
// first and the post language as fallback. Ties go to the smaller country code.
inline std::pair<std::optional<std::string>, CountryProvenance> campaign_origin(const Campaign& c, const Corpus& corpus) {
  std::map<std::string, std::size_t> votes;
  std::map<std::string, CountryProvenance> how;
  std::set<std::string> phones;
  for (const auto& p : c.phones) phones.insert(p.canonical);
  for (const auto& k : c.post_ids) {
    const auto* post = corpus.find_post(k);
    if (post == nullptr) continue;
    for (const auto& ph : post->phones) {
      if (phones.count(ph.canonical) == 0) continue;
      const auto a = infer_country(ph, post->language, corpus.config().table);
      if (a.provenance == CountryProvenance::unknown) continue;
      ++votes[a.country];
      auto [it, fresh] = how.try_emplace(a.country, a.provenance);
      if (!fresh && a.provenance == CountryProvenance::calling_code) it->second = a.provenance;
    }
  }
  const std::pair<const std::string, std::size_t>* best = nullptr;
  for (const auto& v : votes)
    if (best == nullptr || v.second > best->second) best = &v;
  if (best == nullptr) return {std::nullopt, CountryProvenance::unknown};
  return {best->first, how[best->first]};
}

inline std::string file_digest(const std::string& path) { return hex64(fnv1a(read_file(path))); }

namespace pipeline_detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename F>
  auto operator()(const char* stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&] {
      out_.push_back(
          {stage, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
      } else {
        auto v = f();
        record();
        return v;
      }
    } catch (const Error& e) {
      throw Error(e.code(), std::string("stage ") + stage + ": " + e.what());
    }
  }

 private:
  std::vector<StageTiming>& out_;
};

}  // namespace pipeline_detail

// Runs every stage over `corpus` (which may already hold earlier ingests).
// Active review labels from `labels` are overlaid on the formed campaigns.
inline PipelineRun run_pipeline(Corpus& corpus, const PipelineInputs& in, const Thresholds& thr,
                                const ReviewLog* labels = nullptr) {
  thr.validate();
  PipelineRun run;
  run.config = thr;
  pipeline_detail::StageClock stage(run.timings);

  std::string id_material = to_json(thr).dump();
  auto digest = [&](const std::string& path) {
    const auto d = file_digest(path);
    run.input_digests.emplace_back(path, d);
    id_material += "|" + d;
  };
  stage("digest", [&] {
    for (const auto& f : in.post_files) digest(f);
    for (const auto& f : in.status_files) digest(f);
    for (const auto* f : {&in.dnc_path, &in.blacklist_path, &in.actors_path})
      if (*f) digest(**f);
  });
  id_material += std::string("|seed=") + to_string(in.savings_seed);
  run.run_id = "run-" + hex64(fnv1a(id_material));

  stage("ingest", [&] {
    for (const auto& f : in.post_files) {
      const auto s = corpus.ingest_file(f);
      run.counts["ingest_read"] += s.read;
      run.counts["ingest_kept"] += s.kept;
      run.counts["ingest_filtered_no_phone"] += s.filtered_no_phone;
      run.counts["ingest_duplicates"] += s.duplicates;
      run.counts["ingest_malformed"] += s.malformed;
    }
    for (const auto& f : in.status_files) {
      const auto s = corpus.snapshot_accounts(f);
      run.counts["status_updated"] += s.updated;
      run.counts["status_unknown_account"] += s.unknown_account;
    }
  });
  run.corpus_posts = corpus.posts().size();
  run.corpus_accounts = corpus.accounts().size();

  const auto excluded = stage("verified_filter", [&] { return filter_verified_phones(corpus); });
  run.counts["verified_phones_excluded"] = excluded.size();

  auto clustering = stage("cluster", [&] { return cluster_corpus(corpus, excluded, thr); });
  run.counts["phone_clusters"] = clustering.clusters.size();
  run.counts["degenerate_profiles"] = clustering.degenerate_profiles;
  run.counts["campaigns"] = clustering.partition.campaigns.size();
  run.counts["unclustered_posts"] = static_cast<std::size_t>(
      std::count(clustering.partition.doc_campaign.begin(), clustering.partition.doc_campaign.end(), -1));

  std::map<std::string, std::vector<std::string>> phone_tokens;
  for (const auto& c : clustering.clusters) phone_tokens[c.phone.canonical] = c.profile.tokens;

  const auto dnc = in.dnc_path ? DncList::load(*in.dnc_path, corpus.config().table) : DncList{};
  MetricsContext ctx;
  if (in.blacklist_path) ctx.blacklist = load_blacklist(*in.blacklist_path);
  if (in.actors_path) ctx.actors = load_engagement_actors(*in.actors_path);

  stage("flag", [&] {
    for (auto& c : clustering.partition.campaigns) {
      CampaignRecord rec;
      auto [origin, how] = campaign_origin(c, corpus);
      c.origin_country = origin;
      rec.origin_provenance = how;
      rec.campaign = c;
      rec.eligible = eligible_for_characterization(c, thr);
      rec.flag = flag_spam(c, dnc, corpus);
      std::set<std::string> seen;
      for (const auto& p : c.phones)
        for (const auto& t : phone_tokens[p.canonical])
          if (rec.top_tokens.size() < 10 && seen.insert(t).second) rec.top_tokens.push_back(t);
      run.campaigns.push_back(std::move(rec));
    }
    if (labels != nullptr) {
      std::vector<Campaign> cs;
      for (const auto& r : run.campaigns) cs.push_back(r.campaign);
      labels->apply_to(cs);
      for (std::size_t i = 0; i < cs.size(); ++i) run.campaigns[i].campaign = std::move(cs[i]);
    }
  });
  run.counts["auto_flagged"] = static_cast<std::size_t>(
      std::count_if(run.campaigns.begin(), run.campaigns.end(), [](const CampaignRecord& r) { return r.flag.auto_flag; }));
  run.counts["eligible"] = static_cast<std::size_t>(
      std::count_if(run.campaigns.begin(), run.campaigns.end(), [](const CampaignRecord& r) { return r.eligible; }));

  stage("metrics", [&] {
    for (auto& r : run.campaigns) r.metrics = compute_campaign_metrics(r.campaign, corpus, thr, ctx);
  });

  stage("identities", [&] {
    std::vector<IdentityCluster> all;
    for (auto& r : run.campaigns) {
      r.identities = match_identities(campaign_candidates(r.campaign, corpus), thr);
      all.insert(all.end(), r.identities.clusters.begin(), r.identities.clusters.end());
    }
    run.identity_suspension = identity_suspension_stats(all, corpus);
    run.counts["identity_clusters"] = all.size();
    try {
      run.savings = estimate_cross_platform_savings(audience_from_identities(all, corpus, in.savings_seed),
                                                    in.savings_seed, thr);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::missing_audience_data) throw;
    }
  });
  return run;
}

// ---------------------------------------------------------------------------
// Report

inline std::string topic_column(const Campaign& c) { return c.topic.value_or(to_string(c.label)); }

inline nlohmann::json campaign_summary_json(const CampaignRecord& r) {
  const auto& c = r.campaign;
  auto phones = nlohmann::json::array();
  for (const auto& p : c.phones)
    phones.push_back({{"canonical", p.canonical},
                      {"country", p.country},
                      {"line_type", to_string(p.line_type)},
                      {"country_code", opt_json(p.country_code)}});
  nlohmann::json platforms = nlohmann::json::object();
  for (auto p : kAllPlatforms) platforms[to_string(p)] = r.metrics.platform_posts[index_of(p)];
  std::optional<double> suspended_fraction;
  if (r.metrics.suspension.never_suspended_fraction)
    suspended_fraction = static_cast<double>(r.metrics.suspension.suspended_count) /
                         static_cast<double>(r.metrics.suspension.total_accounts);
  return {{"campaign_id", c.campaign_id},
          {"post_count", c.post_ids.size()},
          {"user_count", c.user_ids.size()},
          {"platform_posts", std::move(platforms)},
          {"top_tokens", r.top_tokens},
          {"phones", std::move(phones)},
          {"auto_flag", to_json(r.flag)},
          {"label", to_string(c.label)},
          {"topic", opt_json(c.topic)},
          {"origin_country", opt_json(c.origin_country)},
          {"origin_provenance", to_string(r.origin_provenance)},
          {"eligible", r.eligible},
          {"suspended_fraction", opt_json(suspended_fraction)}};
}

inline nlohmann::json build_report(const PipelineRun& run) {
  nlohmann::json campaigns = nlohmann::json::array();
  std::vector<Campaign> plain;
  std::size_t total_posts = 0;
  for (const auto& r : run.campaigns) {
    auto j = campaign_summary_json(r);
    j["metrics"] = to_json(r.metrics);
    j["identities"] = to_json(r.identities);
    campaigns.push_back(std::move(j));
    plain.push_back(r.campaign);
    total_posts += r.campaign.post_ids.size();
  }

  // Aggregates over characterized campaigns: eligible and not judged benign.
  std::map<std::string, std::map<std::string, OriginBucket>> country_topic;
  PerPlatform<std::size_t> pf_campaigns{}, pf_posts{}, pf_accounts{}, pf_suspended{};
  PerPlatform<std::size_t> starts{};
  std::map<std::string, std::size_t> sequences;
  std::size_t characterized = 0;
  for (const auto& r : run.campaigns) {
    if (!r.eligible || r.campaign.label == CampaignLabel::benign) continue;
    ++characterized;
    auto& cell = country_topic[r.campaign.origin_country.value_or(std::string(kUnknownCountry))][topic_column(r.campaign)];
    ++cell.campaign_count;
    cell.post_count += r.campaign.post_ids.size();
    for (auto p : kAllPlatforms) {
      const auto i = index_of(p);
      if (r.metrics.platform_posts[i] > 0) ++pf_campaigns[i];
      pf_posts[i] += r.metrics.platform_posts[i];
      starts[i] += r.metrics.sequence.start_histogram[i];
    }
    for (const auto& u : r.campaign.user_ids) ++pf_accounts[index_of(u.platform)];
    for (const auto& l : r.metrics.suspension.lifetimes) ++pf_suspended[index_of(l.account.platform)];
    for (const auto& [s, n] : r.metrics.sequence.sequence_histogram) sequences[s] += n;
  }
  nlohmann::json ct = nlohmann::json::object();
  for (const auto& [country, topics] : country_topic) ct[country] = to_json(topics);
  nlohmann::json platform_table = nlohmann::json::object(), start_hist = nlohmann::json::object();
  for (auto p : kAllPlatforms) {
    const auto i = index_of(p);
    platform_table[to_string(p)] = {{"campaigns", pf_campaigns[i]},
                                    {"posts", pf_posts[i]},
                                    {"accounts", pf_accounts[i]},
                                    {"suspended_accounts", pf_suspended[i]}};
    start_hist[to_string(p)] = starts[i];
  }

  std::size_t span_within = 0, span_cross = 0;
  std::map<std::size_t, std::size_t> span;
  for (const auto& r : run.campaigns) {
    span_within += r.identities.within_platform;
    span_cross += r.identities.cross_platform;
    for (const auto& [k, n] : r.identities.by_platform_span) span[k] += n;
  }
  nlohmann::json span_json = nlohmann::json::object();
  for (const auto& [k, n] : span) span_json[std::to_string(k)] = n;

  auto annotations = nlohmann::json::array();
  annotations.push_back("suspension lifetimes approximate takedown time by the last observed post");
  if (run.savings) {
    annotations.push_back("savings are a lower bound: audiences of taken-down accounts are unavailable");
    if (run.savings->annotation) annotations.push_back(*run.savings->annotation);
  }

  return {{"run_id", run.run_id},
          {"config", to_json(run.config)},
          {"corpus", {{"posts", run.corpus_posts}, {"accounts", run.corpus_accounts}}},
          {"totals",
           {{"campaigns", run.campaigns.size()}, {"campaign_posts", total_posts}, {"characterized", characterized}}},
          {"campaigns", std::move(campaigns)},
          {"tables",
           {{"country_topic", std::move(ct)},
            {"origin_distribution", to_json(origin_distribution(plain))},
            {"platforms", std::move(platform_table)},
            {"start_platforms", std::move(start_hist)},
            {"sequences", sequences}}},
          {"identities",
           {{"by_platform_span", std::move(span_json)},
            {"within_platform", span_within},
            {"cross_platform", span_cross},
            {"suspension", to_json(run.identity_suspension)},
            {"asymmetry_TW_FB", opt_json(suspension_asymmetry(run.identity_suspension, Platform::TW, Platform::FB))}}},
          {"savings", run.savings ? to_json(*run.savings) : nlohmann::json(nullptr)},
          {"annotations", std::move(annotations)}};
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

// One row per campaign; undefined values are empty cells.
inline std::string build_report_csv(const PipelineRun& run) {
  std::string out =
      "campaign_id,label,topic,origin_country,post_count,user_count,phone_count,TW,FB,GP,YT,FL,auto_flag,eligible,"
      "suspended_accounts,never_suspended_fraction,mean_lifetime_days,automation_fraction,mean_gap_seconds,"
      "visibility,collusion_adjusted_visibility,most_common_sequence,hashtag_fraction,url_fraction\n";
  for (const auto& r : run.campaigns) {
    const auto& c = r.campaign;
    const auto& m = r.metrics;
    std::vector<std::string> cells = {c.campaign_id,
                                      to_string(c.label),
                                      topic_column(c),
                                      c.origin_country.value_or(std::string(kUnknownCountry)),
                                      std::to_string(c.post_ids.size()),
                                      std::to_string(c.user_ids.size()),
                                      std::to_string(c.phones.size())};
    for (auto p : kAllPlatforms) cells.push_back(std::to_string(m.platform_posts[index_of(p)]));
    cells.push_back(r.flag.auto_flag ? "true" : "false");
    cells.push_back(r.eligible ? "true" : "false");
    cells.push_back(std::to_string(m.suspension.suspended_count));
    cells.push_back(csv_number(m.suspension.never_suspended_fraction));
    cells.push_back(csv_number(m.suspension.mean_lifetime_days));
    cells.push_back(csv_number(m.automation_fraction));
    cells.push_back(csv_number(m.inter_arrival ? std::optional<double>(m.inter_arrival->mean) : std::nullopt));
    cells.push_back(std::to_string(m.visibility.raw_total()));
    const auto adj = m.visibility.adjusted_total();
    cells.push_back(adj ? std::to_string(*adj) : "");
    cells.push_back(m.sequence.most_common.value_or(""));
    cells.push_back(csv_number(m.attributes.hashtags));
    cells.push_back(csv_number(m.attributes.urls));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  }
  return out;
}

// Writes runs/<run_id>/{run.json,report.json,report.csv} under `dir`.
inline std::filesystem::path persist_run(const PipelineRun& run, const std::string& dir) {
  const auto root = std::filesystem::path(dir) / "runs" / run.run_id;
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + root.string());
  write_file((root / "run.json").string(), run_summary_json(run).dump(2) + "\n");
  write_file((root / "report.json").string(), build_report(run).dump(2) + "\n");
  write_file((root / "report.csv").string(), build_report_csv(run));
  return root;
}

}  // namespace phonespam
