#pragma once

// JSON API over a completed pipeline run, independent of the HTTP transport.
// Reads share a lock; label writes take it exclusively and go through
// apply_review_label.

#include <charconv>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonespam/labeler.hpp"
#include "phonespam/pipeline.hpp"

namespace phonespam {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class TriageService {
 public:
  // `corpus` must outlive the service and is never modified by it.
  TriageService(const Corpus& corpus, PipelineRun run, ReviewLog& log, std::size_t sample_size = 100)
      : corpus_(corpus), run_(std::move(run)), log_(log), sample_size_(sample_size) {
    std::vector<Campaign> cs;
    for (const auto& r : run_.campaigns) cs.push_back(r.campaign);
    log_.apply_to(cs);
    for (std::size_t i = 0; i < cs.size(); ++i) run_.campaigns[i].campaign = std::move(cs[i]);
  }

  const std::string& run_id() const { return run_.run_id; }

  ApiResponse handle(const ApiRequest& req) {
    ApiResponse res = dispatch(req);
    res.body["run_id"] = run_.run_id;
    return res;
  }

  // Hash of everything the API can change: labels and their history.
  std::uint64_t state_hash() const {
    std::shared_lock lock(mu_);
    std::string s;
    for (const auto& r : run_.campaigns) {
      s += campaign_summary_json(r).dump();
      for (const auto& h : log_.history(r.campaign.campaign_id)) s += to_json(h).dump();
    }
    return fnv1a(s);
  }

 private:
  static std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
      while (i < path.size() && path[i] == '/') ++i;
      const auto j = path.find('/', i);
      const auto end = j == std::string_view::npos ? path.size() : j;
      if (end > i) parts.emplace_back(path.substr(i, end - i));
      i = end;
    }
    return parts;
  }

  static ApiResponse error(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", code}, {"message", message}}};
  }

  ApiResponse dispatch(const ApiRequest& req) {
    const auto parts = split_path(req.path);
    const bool get = req.method == "GET";
    if (parts.size() == 1 && parts[0] == "campaigns") return get ? list(req) : not_allowed();
    if (parts.size() == 2 && parts[0] == "campaigns") return get ? detail(parts[1]) : not_allowed();
    if (parts.size() == 3 && parts[0] == "campaigns" && parts[2] == "metrics")
      return get ? metrics(parts[1]) : not_allowed();
    if (parts.size() == 3 && parts[0] == "campaigns" && parts[2] == "label")
      return req.method == "POST" ? label(parts[1], req.body) : not_allowed();
    if (parts.size() == 2 && parts[0] == "runs") return get ? runs(parts[1]) : not_allowed();
    if (parts.size() == 1 && parts[0] == "report") return get ? report() : not_allowed();
    return error(404, "not_found", "no route for " + req.path);
  }

  static ApiResponse not_allowed() { return error(405, "method_not_allowed", "method not allowed"); }

  ApiResponse list(const ApiRequest& req) {
    auto q = [&](const char* k) -> std::optional<std::string> {
      auto it = req.query.find(k);
      return it == req.query.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    std::optional<std::size_t> min_posts;
    if (auto v = q("min_posts")) {
      std::size_t n = 0;
      const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
      if (ec != std::errc() || p != v->data() + v->size()) return error(400, "bad_request", "min_posts must be an integer");
      min_posts = n;
    }
    std::optional<Platform> platform;
    if (auto v = q("platform")) {
      platform = parse_platform(*v);
      if (!platform) return error(400, "bad_request", "unknown platform " + *v);
    }
    if (auto v = q("label"); v && !parse_campaign_label(*v)) return error(400, "bad_request", "unknown label " + *v);
    const auto label = q("label"), topic = q("topic"), country = q("country");

    std::shared_lock lock(mu_);
    std::vector<const CampaignRecord*> rows;
    for (const auto& r : run_.campaigns) {
      const auto& c = r.campaign;
      if (label && to_string(c.label) != *label) continue;
      if (topic && c.topic.value_or("") != *topic) continue;
      if (country && c.origin_country.value_or(std::string(kUnknownCountry)) != *country) continue;
      if (platform && r.metrics.platform_posts[index_of(*platform)] == 0) continue;
      if (min_posts && c.post_ids.size() < *min_posts) continue;
      rows.push_back(&r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CampaignRecord* a, const CampaignRecord* b) {
      return a->campaign.post_ids.size() > b->campaign.post_ids.size();
    });
    auto items = nlohmann::json::array();
    for (const auto* r : rows) items.push_back(campaign_summary_json(*r));
    return {200, {{"campaigns", std::move(items)}, {"count", rows.size()}}};
  }

  ApiResponse detail(const std::string& id) {
    std::shared_lock lock(mu_);
    const auto* r = run_.find(id);
    if (r == nullptr) return error(404, "unknown_campaign", id);
    auto j = campaign_summary_json(*r);
    PostRefs posts = campaign_posts(r->campaign, corpus_);
    if (posts.size() > sample_size_) posts.resize(sample_size_);
    auto sample = nlohmann::json::array();
    for (const auto* p : posts) {
      auto pj = to_json(*p);
      sample.push_back(std::move(pj));
    }
    j["posts_sample"] = std::move(sample);
    j["metrics"] = to_json(r->metrics);
    j["identities"] = to_json(r->identities);
    auto history = nlohmann::json::array();
    for (const auto& h : log_.history(id)) history.push_back(to_json(h));
    j["label_history"] = std::move(history);
    return {200, std::move(j)};
  }

  ApiResponse metrics(const std::string& id) {
    std::shared_lock lock(mu_);
    const auto* r = run_.find(id);
    if (r == nullptr) return error(404, "unknown_campaign", id);
    return {200, to_json(r->metrics)};
  }

  ApiResponse label(const std::string& id, const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      return error(400, "bad_request", "body must be JSON");
    }
    if (!j.is_object()) return error(400, "bad_request", "body must be a JSON object");
    if (j.contains("run_id") && j["run_id"] != run_.run_id)
      return error(409, "stale_run", "label submitted against a different run");
    j["campaign_id"] = id;
    ReviewLabel l;
    try {
      l = review_label_from_json(j);
    } catch (const Error& e) {
      return error(400, "bad_request", e.what());
    }
    if (l.reviewed_at == 0) l.reviewed_at = static_cast<Timestamp>(std::time(nullptr));

    std::unique_lock lock(mu_);
    std::vector<Campaign> cs;
    for (const auto& r : run_.campaigns) cs.push_back(r.campaign);
    try {
      const auto updated = apply_review_label(cs, log_, l);
      run_.find(id)->campaign = updated;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::unknown_campaign) return error(404, "unknown_campaign", id);
      throw;
    }
    const auto* r = run_.find(id);
    auto out = campaign_summary_json(*r);
    auto history = nlohmann::json::array();
    for (const auto& h : log_.history(id)) history.push_back(to_json(h));
    out["label_history"] = std::move(history);
    return {200, std::move(out)};
  }

  ApiResponse runs(const std::string& id) {
    if (id != run_.run_id) return error(404, "unknown_run", id);
    std::shared_lock lock(mu_);
    return {200, run_summary_json(run_)};
  }

  ApiResponse report() {
    std::shared_lock lock(mu_);
    return {200, build_report(run_)};
  }

  const Corpus& corpus_;
  PipelineRun run_;
  ReviewLog& log_;
  std::size_t sample_size_;
  mutable std::shared_mutex mu_;
};

}  // namespace phonespam
