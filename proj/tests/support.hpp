#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phonespam/phonespam.hpp"

namespace phonespam::testing {

struct PostSpec {
  std::string id;
  std::string platform = "TW";
  std::string author = "u1";
  Timestamp ts = 0;
  std::string text;
  nlohmann::json engagement = nlohmann::json::object();
  std::vector<std::string> urls = {};
  bool verified = false;
  std::optional<std::string> lang = std::nullopt;
  std::optional<std::string> client = std::nullopt;
};

inline std::string post_line(const PostSpec& s) {
  nlohmann::json author{{"user_id", s.author}, {"verified", s.verified}};
  nlohmann::json j{{"post_id", s.id},  {"platform", s.platform}, {"author", author},
                   {"timestamp", s.ts}, {"text", s.text},         {"engagement", s.engagement}};
  if (!s.urls.empty()) j["urls"] = s.urls;
  if (s.lang) j["language"] = *s.lang;
  if (s.client) j["client"] = *s.client;
  return j.dump();
}

inline IngestSummary ingest_lines(Corpus& c, const std::vector<std::string>& lines) {
  std::string all;
  for (const auto& l : lines) all += l + "\n";
  std::istringstream in(all);
  return c.ingest_stream(in, "test");
}

inline IngestSummary ingest_posts(Corpus& c, const std::vector<PostSpec>& posts) {
  std::vector<std::string> lines;
  for (const auto& p : posts) lines.push_back(post_line(p));
  return ingest_lines(c, lines);
}

inline SnapshotSummary snapshot(Corpus& c, const std::vector<std::string>& lines) {
  std::string all;
  for (const auto& l : lines) all += l + "\n";
  std::istringstream in(all);
  return c.snapshot_stream(in, "test");
}

inline std::string status_line(const std::string& platform, const std::string& user, const std::string& status,
                               Timestamp at) {
  return nlohmann::json{{"platform", platform}, {"user_id", user}, {"status", status}, {"checked_at", at}}.dump();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("phonespam-" + tag + "-" + hex64(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return child.empty() ? path_.string() : (path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

inline PostRefs refs(const Corpus& c) {
  PostRefs out;
  for (const auto& [k, p] : c.posts()) out.push_back(&p);
  return out;
}

}  // namespace phonespam::testing
