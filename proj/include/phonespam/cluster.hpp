#pragma once

// Campaign formation. Each phone gets a representative token profile, posts
// that share at least `token_overlap` of the profile join the phone's
// cluster, and phones whose clusters have average cross-post Jaccard above
// `jaccard_merge` are merged (single linkage) into campaigns.

#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "phonespam/common.hpp"
#include "phonespam/ingest.hpp"
#include "phonespam/model.hpp"
#include "phonespam/text.hpp"

namespace phonespam {

using TokenId = std::uint32_t;
using TokenSet = std::vector<TokenId>;  // sorted, unique

class Vocabulary {
 public:
  TokenId intern(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, static_cast<TokenId>(words_.size()));
    if (inserted) words_.push_back(token);
    return it->second;
  }

  std::optional<TokenId> find(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(TokenId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }

  TokenSet make_set(const std::vector<std::string>& tokens) {
    TokenSet s;
    s.reserve(tokens.size());
    for (const auto& t : tokens) s.push_back(intern(t));
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::string> words_;
};

inline std::size_t intersection_size(const TokenSet& a, const TokenSet& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

// Two empty sets are equal, so their Jaccard coefficient is 1.
inline double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  const auto inter = intersection_size(a, b);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// Post tokens used for clustering: tokenize() minus stopwords.
inline std::vector<std::string> content_tokens(std::string_view text,
                                               const std::set<std::string, std::less<>>& stopwords = default_stopwords()) {
  auto tokens = tokenize(text);
  tokens.erase(std::remove_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return stopwords.count(t) > 0; }),
               tokens.end());
  return tokens;
}

// Tokens within `window` positions of the first occurrence of `phone` in the
// text; the whole post when the phone is not found.
inline std::vector<std::string> window_tokens(std::string_view text, const PhoneNumber& phone, std::size_t window,
                                              const CountryTable& table,
                                              const std::set<std::string, std::less<>>& stopwords = default_stopwords()) {
  auto tokens = tokenize_with_offsets(text);
  std::optional<std::size_t> phone_at;
  for (const auto& m : extract_phone_numbers(text, table)) {
    if (m.phone.canonical == phone.canonical) {
      phone_at = m.begin;
      break;
    }
  }
  std::vector<std::string> out;
  if (!phone_at) {
    for (auto& t : tokens)
      if (stopwords.count(t.text) == 0) out.push_back(std::move(t.text));
    return out;
  }
  const auto pos = static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [&](const OffsetToken& t) { return t.begin < *phone_at; }));
  const std::size_t lo = pos > window ? pos - window : 0;
  const std::size_t hi = std::min(tokens.size(), pos + window);
  for (std::size_t i = lo; i < hi; ++i)
    if (stopwords.count(tokens[i].text) == 0) out.push_back(tokens[i].text);
  return out;
}

struct Document {
  PostKey key;
  AccountKey author;
  TokenSet tokens;
};

// ---------------------------------------------------------------------------
// Profiles and phone clusters

struct TokenProfile {
  PhoneNumber phone;
  std::vector<std::string> tokens;  // by descending frequency, then lexicographic
  std::map<std::string, double> doc_frequency;
  TokenSet ids;
  std::size_t post_count = 0;
};

inline TokenProfile build_token_profile(const PhoneNumber& phone, std::span<const TokenSet> post_tokens,
                                        const Vocabulary& vocab, const Thresholds& thr) {
  if (post_tokens.empty()) throw Error(ErrorCode::empty_cluster, "no posts for phone " + phone.canonical);
  std::map<TokenId, std::size_t> counts;
  for (const auto& s : post_tokens)
    for (auto t : s) ++counts[t];

  const auto n = static_cast<double>(post_tokens.size());
  struct Candidate {
    TokenId id;
    std::size_t count;
  };
  std::vector<Candidate> keep;
  for (const auto& [id, c] : counts)
    if (static_cast<double>(c) / n >= thr.profile_doc_frequency) keep.push_back({id, c});
  std::sort(keep.begin(), keep.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.count != b.count) return a.count > b.count;
    return vocab.word(a.id) < vocab.word(b.id);
  });
  if (keep.size() > thr.profile_token_cap) keep.resize(thr.profile_token_cap);

  TokenProfile p;
  p.phone = phone;
  p.post_count = post_tokens.size();
  for (const auto& k : keep) {
    p.tokens.push_back(vocab.word(k.id));
    p.doc_frequency[vocab.word(k.id)] = static_cast<double>(k.count) / n;
    p.ids.push_back(k.id);
  }
  std::sort(p.ids.begin(), p.ids.end());
  return p;
}

// Share of the profile covered by a post. An empty profile covers everything.
inline double profile_overlap(const TokenProfile& profile, const TokenSet& post) {
  if (profile.ids.empty()) return 1.0;
  return static_cast<double>(intersection_size(profile.ids, post)) / static_cast<double>(profile.ids.size());
}

struct PhoneCluster {
  PhoneNumber phone;
  TokenProfile profile;
  std::vector<std::size_t> posts;  // document indices, ascending
  bool degenerate = false;         // empty profile, every candidate admitted
};

// `candidate_tokens[i]` are the tokens of document `candidates[i]` as seen by
// the profile (whole post or context window).
inline PhoneCluster assign_posts_to_phone(const TokenProfile& profile, std::span<const std::size_t> candidates,
                                          std::span<const TokenSet> candidate_tokens, const Thresholds& thr) {
  PhoneCluster c;
  c.phone = profile.phone;
  c.profile = profile;
  c.degenerate = profile.ids.empty();
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (profile_overlap(profile, candidate_tokens[i]) >= thr.token_overlap) c.posts.push_back(candidates[i]);
  std::sort(c.posts.begin(), c.posts.end());
  return c;
}

// Mean Jaccard over all cross pairs of posts; a seeded sample of
// `pair_sample_cap` pairs when there are more. Symmetric in its arguments.
inline double phone_pair_similarity(const PhoneCluster& c1, const PhoneCluster& c2, std::span<const Document> docs,
                                    const Thresholds& thr) {
  if (c1.posts.empty() || c2.posts.empty())
    throw Error(ErrorCode::empty_cluster, "similarity of an empty phone cluster");
  const bool swap = c2.phone.canonical < c1.phone.canonical;
  const auto& a = swap ? c2 : c1;
  const auto& b = swap ? c1 : c2;

  if (thr.similarity_mode == SimilarityMode::aggregate) {
    TokenSet ua, ub;
    for (auto i : a.posts) ua.insert(ua.end(), docs[i].tokens.begin(), docs[i].tokens.end());
    for (auto i : b.posts) ub.insert(ub.end(), docs[i].tokens.begin(), docs[i].tokens.end());
    for (auto* s : {&ua, &ub}) {
      std::sort(s->begin(), s->end());
      s->erase(std::unique(s->begin(), s->end()), s->end());
    }
    return jaccard(ua, ub);
  }

  const auto pairs = static_cast<std::uint64_t>(a.posts.size()) * b.posts.size();
  double sum = 0.0;
  if (pairs <= thr.pair_sample_cap) {
    for (auto i : a.posts)
      for (auto j : b.posts) sum += jaccard(docs[i].tokens, docs[j].tokens);
    return sum / static_cast<double>(pairs);
  }
  std::mt19937_64 rng(thr.seed ^ fnv1a(a.phone.canonical + "|" + b.phone.canonical));
  for (std::size_t k = 0; k < thr.pair_sample_cap; ++k) {
    const auto i = a.posts[uniform_index(rng(), a.posts.size())];
    const auto j = b.posts[uniform_index(rng(), b.posts.size())];
    sum += jaccard(docs[i].tokens, docs[j].tokens);
  }
  return sum / static_cast<double>(thr.pair_sample_cap);
}

class PairSimilarities {
 public:
  PairSimilarities() = default;
  explicit PairSimilarities(std::size_t n) : n_(n), values_(n * n, 1.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

inline PairSimilarities compute_pair_similarities(std::span<const PhoneCluster> clusters, std::span<const Document> docs,
                                                  const Thresholds& thr) {
  PairSimilarities s(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      s.set(i, j, phone_pair_similarity(clusters[i], clusters[j], docs, thr));
  return s;
}

// ---------------------------------------------------------------------------
// Campaigns

enum class CampaignLabel { unreviewed, spam, benign };

inline const char* to_string(CampaignLabel l) {
  switch (l) {
    case CampaignLabel::unreviewed: return "unreviewed";
    case CampaignLabel::spam: return "spam";
    case CampaignLabel::benign: return "benign";
  }
  return "unreviewed";
}

inline std::optional<CampaignLabel> parse_campaign_label(std::string_view s) {
  if (s == "unreviewed") return CampaignLabel::unreviewed;
  if (s == "spam") return CampaignLabel::spam;
  if (s == "benign") return CampaignLabel::benign;
  return std::nullopt;
}

struct Campaign {
  std::string campaign_id;
  std::vector<PhoneNumber> phones;  // ascending canonical
  std::vector<PostKey> post_ids;    // ascending
  std::vector<AccountKey> user_ids;  // authors of post_ids, ascending
  CampaignLabel label = CampaignLabel::unreviewed;
  std::optional<std::string> topic;
  std::optional<std::string> origin_country;
};

inline std::string campaign_id_for(const std::vector<std::string>& sorted_canonicals) {
  std::string joined;
  for (const auto& c : sorted_canonicals) {
    if (!joined.empty()) joined += ',';
    joined += c;
  }
  return "cmp-" + hex64(fnv1a(joined));
}

inline nlohmann::json to_json(const Campaign& c) {
  auto phones = nlohmann::json::array();
  for (const auto& p : c.phones) phones.push_back(p.canonical);
  nlohmann::json j{{"campaign_id", c.campaign_id},
                   {"phones", std::move(phones)},
                   {"post_count", c.post_ids.size()},
                   {"user_count", c.user_ids.size()},
                   {"label", to_string(c.label)}};
  j["topic"] = c.topic ? nlohmann::json(*c.topic) : nlohmann::json(nullptr);
  return j;
}

struct Partition {
  std::vector<Campaign> campaigns;  // ascending campaign_id
  std::vector<int> doc_campaign;    // per document: index into campaigns, -1 = unclustered
};

inline Partition partition_documents(std::span<const PhoneCluster> clusters, const PairSimilarities& sims,
                                     std::span<const Document> docs, double merge_threshold) {
  const auto n = clusters.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (sims(i, j) > merge_threshold) parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[find(i)].push_back(i);

  struct Group {
    std::string id;
    std::vector<std::size_t> clusters;
  };
  std::vector<Group> groups;
  for (auto& [root, members] : components) {
    std::vector<std::string> canon;
    for (auto m : members) canon.push_back(clusters[m].phone.canonical);
    std::sort(canon.begin(), canon.end());
    groups.push_back({campaign_id_for(canon), std::move(members)});
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.id < b.id; });
  std::vector<std::size_t> cluster_group(n);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto c : groups[g].clusters) cluster_group[c] = g;

  // Each document goes to exactly one campaign: the one holding the cluster
  // whose profile it overlaps most (ties: smaller campaign id).
  Partition part;
  part.doc_campaign.assign(docs.size(), -1);
  std::vector<double> best(docs.size(), -1.0);
  for (std::size_t c = 0; c < n; ++c) {
    const auto g = static_cast<int>(cluster_group[c]);
    for (auto d : clusters[c].posts) {
      const double ov = profile_overlap(clusters[c].profile, docs[d].tokens);
      if (part.doc_campaign[d] < 0 || ov > best[d] || (ov == best[d] && g < part.doc_campaign[d])) {
        part.doc_campaign[d] = g;
        best[d] = ov;
      }
    }
  }

  part.campaigns.resize(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& camp = part.campaigns[g];
    camp.campaign_id = groups[g].id;
    for (auto c : groups[g].clusters) camp.phones.push_back(clusters[c].phone);
    std::sort(camp.phones.begin(), camp.phones.end(),
              [](const PhoneNumber& a, const PhoneNumber& b) { return a.canonical < b.canonical; });
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (part.doc_campaign[d] < 0) continue;
    auto& camp = part.campaigns[static_cast<std::size_t>(part.doc_campaign[d])];
    camp.post_ids.push_back(docs[d].key);
    camp.user_ids.push_back(docs[d].author);
  }
  for (auto& camp : part.campaigns) {
    std::sort(camp.post_ids.begin(), camp.post_ids.end());
    std::sort(camp.user_ids.begin(), camp.user_ids.end());
    camp.user_ids.erase(std::unique(camp.user_ids.begin(), camp.user_ids.end()), camp.user_ids.end());
  }
  return part;
}

inline std::vector<Campaign> merge_phone_clusters(std::span<const PhoneCluster> clusters, std::span<const Document> docs,
                                                  const Thresholds& thr) {
  const auto sims = compute_pair_similarities(clusters, docs, thr);
  return partition_documents(clusters, sims, docs, thr.jaccard_merge).campaigns;
}

// ---------------------------------------------------------------------------
// Silhouette

// Mean silhouette of `labels` (>= 0) under distance `dist(i, j)`. Members of
// singleton clusters score 0. nullopt when fewer than two clusters exist.
template <typename Dist>
std::optional<double> mean_silhouette(const std::vector<int>& labels, Dist&& dist) {
  const auto n = labels.size();
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) return std::nullopt;
  std::vector<int> ids;
  for (const auto& [l, s] : sizes) ids.push_back(l);
  std::map<int, std::size_t> slot;
  for (std::size_t k = 0; k < ids.size(); ++k) slot[ids[k]] = k;

  double total = 0.0;
  std::vector<double> sum(ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] == 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[slot[labels[j]]] += dist(i, j);
    const auto own = slot[labels[i]];
    const double a = sum[own] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ids.size(); ++k)
      if (k != own) b = std::min(b, sum[k] / static_cast<double>(sizes[ids[k]]));
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

struct SilhouettePoint {
  double threshold = 0.0;
  std::optional<double> mean;  // undefined when the threshold yields one campaign
  std::size_t campaigns = 0;
  std::size_t scored_posts = 0;
};

struct SilhouetteOptions {
  std::size_t sample_size = 2000;  // exact below this many clustered posts
};

// Distance is 1 - Jaccard of post tokens; unclustered posts are left out.
inline std::vector<SilhouettePoint> silhouette_sweep(std::span<const PhoneCluster> clusters,
                                                     std::span<const Document> docs, std::span<const double> grid,
                                                     const Thresholds& thr, const SilhouetteOptions& opts = {}) {
  const auto sims = compute_pair_similarities(clusters, docs, thr);

  std::set<std::size_t> clustered;
  for (const auto& c : clusters) clustered.insert(c.posts.begin(), c.posts.end());
  std::vector<std::size_t> sample(clustered.begin(), clustered.end());
  if (sample.size() > opts.sample_size) {
    std::mt19937_64 rng(thr.seed ^ 0x5111u);
    for (std::size_t i = 0; i < opts.sample_size; ++i) {
      const auto k = i + uniform_index(rng(), sample.size() - i);
      std::swap(sample[i], sample[k]);
    }
    sample.resize(opts.sample_size);
    std::sort(sample.begin(), sample.end());
  }
  const auto m = sample.size();
  std::vector<double> dist(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      dist[i * m + j] = dist[j * m + i] = 1.0 - jaccard(docs[sample[i]].tokens, docs[sample[j]].tokens);

  std::vector<SilhouettePoint> out;
  for (double t : grid) {
    const auto part = partition_documents(clusters, sims, docs, t);
    SilhouettePoint pt;
    pt.threshold = t;
    pt.campaigns = part.campaigns.size();
    pt.scored_posts = m;
    if (part.campaigns.size() >= 2) {
      std::vector<int> labels(m);
      for (std::size_t i = 0; i < m; ++i) labels[i] = part.doc_campaign[sample[i]];
      pt.mean = mean_silhouette(labels, [&](std::size_t i, std::size_t j) { return dist[i * m + j]; });
    }
    out.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus-level driver

struct ClusteringResult {
  Vocabulary vocab;
  std::vector<Document> docs;
  std::vector<PhoneCluster> clusters;  // non-empty clusters, ascending phone
  PairSimilarities similarities;
  Partition partition;
  std::size_t excluded_phones = 0;
  std::size_t degenerate_profiles = 0;
};

struct ClusterInputs {
  Vocabulary vocab;
  std::vector<Document> docs;                                  // corpus order
  std::map<std::string, std::vector<std::size_t>> phone_posts;  // canonical -> document indices
  std::map<std::string, PhoneNumber> phones;
};

inline ClusterInputs prepare_cluster_inputs(const Corpus& corpus) {
  ClusterInputs in;
  in.docs.reserve(corpus.posts().size());
  for (const auto& [key, post] : corpus.posts()) {
    const auto idx = in.docs.size();
    in.docs.push_back({key, post.author_key(), in.vocab.make_set(content_tokens(post.text))});
    for (const auto& ph : post.phones) {
      in.phone_posts[ph.canonical].push_back(idx);
      in.phones.try_emplace(ph.canonical, ph);
    }
  }
  return in;
}

inline std::vector<PhoneCluster> form_phone_clusters(ClusterInputs& in, const Corpus& corpus,
                                                     const std::set<std::string>& excluded, const Thresholds& thr,
                                                     std::size_t* degenerate = nullptr) {
  std::vector<PhoneCluster> out;
  for (const auto& [canonical, candidates] : in.phone_posts) {
    if (excluded.count(canonical) > 0) continue;
    const auto& phone = in.phones.at(canonical);
    std::vector<TokenSet> tokens;
    tokens.reserve(candidates.size());
    for (auto d : candidates) {
      if (thr.context_window == 0) {
        tokens.push_back(in.docs[d].tokens);
      } else {
        const auto* post = corpus.find_post(in.docs[d].key);
        tokens.push_back(in.vocab.make_set(window_tokens(post->text, phone, thr.context_window, corpus.config().table)));
      }
    }
    auto profile = build_token_profile(phone, tokens, in.vocab, thr);
    auto cluster = assign_posts_to_phone(profile, candidates, tokens, thr);
    if (cluster.degenerate && degenerate != nullptr) ++*degenerate;
    if (!cluster.posts.empty()) out.push_back(std::move(cluster));
  }
  return out;
}

inline ClusteringResult cluster_corpus(const Corpus& corpus, const std::set<std::string>& excluded,
                                       const Thresholds& thr) {
  auto in = prepare_cluster_inputs(corpus);
  ClusteringResult r;
  r.clusters = form_phone_clusters(in, corpus, excluded, thr, &r.degenerate_profiles);
  for (const auto& [canonical, posts] : in.phone_posts) r.excluded_phones += excluded.count(canonical);
  r.vocab = std::move(in.vocab);
  r.docs = std::move(in.docs);
  r.similarities = compute_pair_similarities(r.clusters, r.docs, thr);
  r.partition = partition_documents(r.clusters, r.similarities, r.docs, thr.jaccard_merge);
  return r;
}

}  // namespace phonespam
