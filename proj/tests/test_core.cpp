#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace phonespam;
using namespace phonespam::testing;

namespace {

const CountryTable& table() { return CountryTable::bundled(); }

std::string canon(std::string_view raw) {
  auto n = normalize_phone(raw, table());
  return n ? n.phone->canonical : std::string("<") + to_string(n.rejection) + ">";
}

}  // namespace

// ---------------------------------------------------------------------------
// phone_core

TEST(Phone, ExtractsParenthesizedVariant) {
  const auto m = extract_phone_numbers("Call 1(888)551-2881 now", table());
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].phone.canonical, "18885512881");
  EXPECT_EQ(m[0].raw, "1(888)551-2881");
}

TEST(Phone, DottedAndSpacedVariantsAgree) {
  const auto a = extract_phone_numbers("1.888.551.2881", table());
  const auto b = extract_phone_numbers("1 888 551 2881", table());
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(a[0].phone.canonical, "18885512881");
  EXPECT_EQ(b[0].phone.canonical, "18885512881");
}

TEST(Phone, AllFourNamedVariantsCollapse) {
  for (const char* v : {"1-888-551-2881", "1(888)551-2881", "1(888) 551-2881", "1.888.551.2881", "1 888 551 2881"})
    EXPECT_EQ(canon(v), "18885512881") << v;
}

TEST(Phone, NoDigitsNoMatches) { EXPECT_TRUE(extract_phone_numbers("no digits here", table()).empty()); }

TEST(Phone, ShortDigitRunIgnored) { EXPECT_TRUE(extract_phone_numbers("order #12345 today", table()).empty()); }

TEST(Phone, CurrencyAmountsAreNotPhones) {
  EXPECT_TRUE(extract_phone_numbers("only $ 1234567 today", table()).empty());
  EXPECT_TRUE(extract_phone_numbers("price $1,299,000.00", table()).empty());
}

TEST(Phone, NormalizeExamples) {
  EXPECT_EQ(canon("1-888-551-2881"), "18885512881");
  EXPECT_EQ(canon("18885512881"), "18885512881");
  const auto r = normalize_phone("123456", table());
  EXPECT_FALSE(r);
  EXPECT_EQ(r.rejection, PhoneRejection::too_short);
  EXPECT_EQ(normalize_phone("1234567890123456", table()).rejection, PhoneRejection::too_long);
  EXPECT_EQ(normalize_phone("12a4567890", table()).rejection, PhoneRejection::non_numeric_core);
}

TEST(Phone, InternationalPrefixesStripped) {
  const auto a = normalize_phone("+62 812 3456 7890", table());
  const auto b = normalize_phone("0062 812 3456 7890", table());
  ASSERT_TRUE(a);
  ASSERT_TRUE(b);
  EXPECT_EQ(a.phone->canonical, "6281234567890");
  EXPECT_EQ(a.phone->canonical, b.phone->canonical);
  EXPECT_TRUE(a.phone->international_prefix);
  EXPECT_EQ(a.phone->country, "ID");
  EXPECT_EQ(a.phone->line_type, LineType::mobile);
}

TEST(Phone, LineTypes) {
  auto lt = [](const char* raw) { return normalize_phone(raw, table()).phone->line_type; };
  EXPECT_EQ(lt("18885512881"), LineType::toll_free);
  EXPECT_EQ(lt("18005495301"), LineType::toll_free);
  EXPECT_EQ(lt("2125550123"), LineType::unknown);
  EXPECT_EQ(lt("+44 20 7946 0000"), LineType::unknown);
}

TEST(Phone, InferCountry) {
  const auto nanp = *normalize_phone("18885512881", table()).phone;
  const auto a = infer_country(nanp, std::nullopt, table());
  EXPECT_EQ(a.country, "US/CA");
  EXPECT_EQ(a.provenance, CountryProvenance::calling_code);

  const auto bare = *normalize_phone("0812345678", table()).phone;
  ASSERT_FALSE(bare.country_code);
  const auto id = infer_country(bare, std::string("in"), table());
  EXPECT_EQ(id.country, "ID");
  EXPECT_EQ(id.provenance, CountryProvenance::language_heuristic);

  const auto en = infer_country(bare, std::string("en"), table());
  EXPECT_EQ(en.country, kUnknownCountry);
  EXPECT_EQ(en.provenance, CountryProvenance::unknown);
}

TEST(PhoneProperty, IdempotentAndPure) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    std::string d;
    const auto len = 7 + rng() % 9;
    for (std::size_t k = 0; k < len; ++k) d += static_cast<char>('0' + rng() % 10);
    const auto a = normalize_phone(d, table());
    const auto b = normalize_phone(d, table());
    ASSERT_EQ(a.phone, b.phone);
    if (a) {
      const auto again = normalize_phone(a.phone->canonical, table());
      ASSERT_TRUE(again);
      EXPECT_EQ(again.phone->canonical, a.phone->canonical);
    }
  }
}

TEST(PhoneProperty, SeparatorInsertionNeverChangesCanonical) {
  std::mt19937_64 rng(20160425);
  const std::string seps = " -.()";
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string d;
    const auto len = 7 + rng() % 9;
    d += static_cast<char>('1' + rng() % 9);
    for (std::size_t k = 1; k < len; ++k) d += static_cast<char>('0' + rng() % 10);
    std::string s;
    for (std::size_t k = 0; k < d.size(); ++k) {
      s += d[k];
      if (k + 1 < d.size() && rng() % 3 == 0) s += seps[rng() % seps.size()];
    }
    if (canon(s) != canon(d)) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(PhoneProperty, MatchesRoundTrip) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> fillers = {"call", "now", "sms", "cheap", "deal", "today"};
  for (int i = 0; i < 500; ++i) {
    std::string text;
    for (int w = 0; w < 6; ++w) {
      if (rng() % 3 == 0) {
        std::string d = "1-8" + std::to_string(rng() % 90 + 10) + "-" + std::to_string(rng() % 900 + 100) + "-" +
                        std::to_string(rng() % 9000 + 1000);
        text += d + " ";
      } else {
        text += fillers[rng() % fillers.size()] + " ";
      }
    }
    for (const auto& m : extract_phone_numbers(text, table())) {
      EXPECT_EQ(text.substr(m.begin, m.end - m.begin), m.raw);
      const auto n = normalize_phone(m.raw, table());
      ASSERT_TRUE(n) << m.raw;
      EXPECT_EQ(*n.phone, m.phone);
    }
  }
}

TEST(PhoneProperty, ClassificationAgreesWithTableLookup) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 3000; ++i) {
    const auto& entries = table().entries();
    auto it = entries.begin();
    std::advance(it, static_cast<long>(rng() % entries.size()));
    const auto& e = it->second;
    std::string national;
    const auto len = e.min_len + rng() % (e.max_len - e.min_len + 1);
    for (std::size_t k = 0; k < len; ++k) national += static_cast<char>('0' + rng() % 10);
    const auto before = "+" + std::to_string(e.calling_code) + national;
    const auto n = normalize_phone(before, table());
    ASSERT_TRUE(n);
    const auto copy = *n.phone;
    // Direct lookup oracle.
    LineType expect = LineType::unknown;
    for (const auto& p : e.toll_free_prefixes)
      if (national.rfind(p, 0) == 0) expect = LineType::toll_free;
    if (expect == LineType::unknown)
      for (const auto& p : e.mobile_prefixes)
        if (national.rfind(p, 0) == 0) expect = LineType::mobile;
    EXPECT_EQ(classify_line_type(*n.phone, table()), expect);
    EXPECT_EQ(infer_country(*n.phone, std::nullopt, table()).country, e.country);
    EXPECT_EQ(*n.phone, copy);
  }
}

TEST(CountryTableFile, LoadsAndValidates) {
  TempDir dir("table");
  write_file(dir.str("t.json"), R"([{"calling_code": 7, "country": "RU", "toll_free_prefixes": ["800"], "min_len": 10, "max_len": 10}])");
  const auto t = CountryTable::load(dir.str("t.json"));
  ASSERT_NE(t.find(7), nullptr);
  EXPECT_EQ(t.find(7)->country, "RU");
  write_file(dir.str("bad.json"), "{");
  EXPECT_THROW(CountryTable::load(dir.str("bad.json")), Error);
}

// ---------------------------------------------------------------------------
// ingest

TEST(Ingest, CompleteRecordParses) {
  const auto j = nlohmann::json::parse(R"({"post_id":"1","platform":"FB","author":{"user_id":"u","screen_name":"s",
    "display_name":"D","followers":3,"friends":4,"verified":true},"timestamp":"2016-04-25T00:00:10Z",
    "text":"call 18885512881","urls":["http://a.com/x"],"engagement":{"likes":2,"reshares":1,"reactions":3},
    "client":"web","language":"en","has_photo":true})");
  const auto r = parse_post_record(j);
  ASSERT_TRUE(r) << r.detail;
  const auto& p = *r.post;
  EXPECT_EQ(p.platform, Platform::FB);
  EXPECT_EQ(p.timestamp, 1461542410);
  EXPECT_EQ(p.urls.size(), 1u);
  EXPECT_EQ(p.engagement.shares, 1);
  EXPECT_EQ(p.engagement.likes, 5);  // reactions fold into likes on Facebook
  EXPECT_EQ(p.client, "web");
  EXPECT_EQ(p.language, "en");
  EXPECT_TRUE(p.has_photo);
  ASSERT_TRUE(r.author);
  EXPECT_TRUE(r.author->verified);
  EXPECT_EQ(r.author->friends, 4);
}

TEST(Ingest, Rejections) {
  auto rej = [](const char* s) { return parse_post_record(nlohmann::json::parse(s)).rejection; };
  EXPECT_EQ(rej(R"({"platform":"TW","author":"u","timestamp":1,"text":"x"})"), PostRejection::missing_required_field);
  EXPECT_EQ(rej(R"({"post_id":"1","platform":"myspace","author":"u","timestamp":1,"text":"x"})"),
            PostRejection::unknown_platform);
  EXPECT_EQ(rej(R"({"post_id":"1","platform":"TW","author":"u","timestamp":"yesterday","text":"x"})"),
            PostRejection::bad_timestamp);
  EXPECT_EQ(parse_post_line("{not json").rejection, PostRejection::malformed_json);
}

TEST(Ingest, KeywordFilter) {
  Post p;
  p.text = "WhatsApp me at 18885512881";
  attach_phones(p, table());
  EXPECT_TRUE(keyword_filter(p, default_keywords()));
  Post q;
  q.text = "nice weather today";
  EXPECT_FALSE(keyword_filter(q, default_keywords()));
  Post r;
  r.text = "lovely 18885512881";
  attach_phones(r, table());
  EXPECT_TRUE(keyword_filter(r, {}));
}

TEST(Ingest, KeepsPhonePostsAndCountsPhoneless) {
  Corpus c;
  std::vector<PostSpec> posts;
  for (int i = 0; i < 10; ++i)
    posts.push_back({"p" + std::to_string(i), "TW", "u", i + 1, i < 8 ? "call 18885512881" : "call me maybe"});
  const auto s = ingest_posts(c, posts);
  EXPECT_EQ(s.kept, 8u);
  EXPECT_EQ(s.filtered_no_phone, 2u);
  EXPECT_TRUE(s.balanced());

  const auto again = ingest_posts(c, posts);
  EXPECT_EQ(again.kept, 0u);
  EXPECT_EQ(again.duplicates, 8u);
  EXPECT_EQ(again.filtered_no_phone, 2u);
  EXPECT_TRUE(again.balanced());
  EXPECT_EQ(c.posts().size(), 8u);
}

TEST(Ingest, MalformedLinesNeverAbort) {
  Corpus c;
  const auto s = ingest_lines(c, {"{broken", post_line({"a", "TW", "u", 1, "call 18885512881"}), "[]"});
  EXPECT_EQ(s.read, 3u);
  EXPECT_EQ(s.malformed, 2u);
  EXPECT_EQ(s.kept, 1u);
  EXPECT_TRUE(s.balanced());
}

TEST(Ingest, SameTextOnTwoPlatformsKeptTwice) {
  Corpus c;
  ingest_posts(c, {{"1", "TW", "u", 1, "call 18885512881"}, {"1", "FB", "u", 1, "call 18885512881"}});
  EXPECT_EQ(c.posts().size(), 2u);
}

TEST(Ingest, SnapshotStatuses) {
  Corpus c;
  ingest_posts(c, {{"1", "TW", "alice", 1, "call 18885512881"}});
  auto s = snapshot(c, {status_line("TW", "alice", "active", 100), status_line("TW", "alice", "suspended", 200)});
  EXPECT_EQ(s.updated, 2u);
  const auto* a = c.find_account({Platform::TW, "alice"});
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->status, AccountStatus::suspended);
  ASSERT_EQ(a->status_history.size(), 2u);
  EXPECT_EQ(a->status_history[0].status, AccountStatus::active);

  // Out-of-order snapshot: the later checked_at still wins.
  snapshot(c, {status_line("TW", "alice", "active", 150)});
  EXPECT_EQ(c.find_account({Platform::TW, "alice"})->status, AccountStatus::suspended);

  s = snapshot(c, {status_line("FB", "ghost", "suspended", 1)});
  EXPECT_EQ(s.unknown_account, 1u);
  EXPECT_EQ(c.find_account({Platform::FB, "ghost"}), nullptr);
}

TEST(Ingest, PersistentCorpusReplays) {
  TempDir dir("corpus");
  {
    auto c = Corpus::open(dir.str());
    ingest_posts(c, {{"1", "TW", "alice", 1, "call 18885512881"}, {"2", "GP", "bob", 2, "sms 18885512881"}});
    snapshot(c, {status_line("TW", "alice", "deleted", 10)});
  }
  auto c = Corpus::open(dir.str());
  EXPECT_EQ(c.posts().size(), 2u);
  EXPECT_EQ(c.find_account({Platform::TW, "alice"})->status, AccountStatus::deleted);
  const auto s = ingest_posts(c, {{"1", "TW", "alice", 1, "call 18885512881"}});
  EXPECT_EQ(s.duplicates, 1u);
}

TEST(IngestProperty, KeysUniqueUnderInterleaving) {
  std::mt19937_64 rng(3);
  Corpus c;
  for (int round = 0; round < 50; ++round) {
    if (rng() % 2 == 0) {
      std::vector<PostSpec> batch;
      for (int i = 0; i < 10; ++i) {
        const auto id = std::to_string(rng() % 40);
        batch.push_back({id, std::string(to_string(kAllPlatforms[rng() % 5])), "u" + std::to_string(rng() % 5),
                         static_cast<Timestamp>(1 + rng() % 1000), rng() % 4 ? "call 18885512881" : "nothing here"});
      }
      ASSERT_TRUE(ingest_posts(c, batch).balanced());
    } else {
      snapshot(c, {status_line("TW", "u" + std::to_string(rng() % 5), rng() % 2 ? "active" : "suspended",
                               static_cast<Timestamp>(rng() % 1000))});
    }
    std::set<PostKey> keys;
    for (const auto& [k, p] : c.posts()) {
      EXPECT_TRUE(keys.insert(k).second);
      EXPECT_EQ(k, p.key());
      EXPECT_FALSE(p.phones.empty());
    }
  }
}

// ---------------------------------------------------------------------------
// tokenization and clustering

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Buy HERBAL pills!! http://x.co @bob #promo"),
            (std::vector<std::string>{"buy", "herbal", "pills", "promo"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("call 18885512881"), (std::vector<std::string>{"call"}));
}

namespace {

struct Fixture {
  Vocabulary vocab;
  std::vector<Document> docs;

  std::size_t doc(const std::vector<std::string>& tokens) {
    docs.push_back({{Platform::TW, std::to_string(docs.size())}, {Platform::TW, "u"}, vocab.make_set(tokens)});
    return docs.size() - 1;
  }
  PhoneCluster cluster(const std::string& phone, const std::vector<std::vector<std::string>>& posts) {
    PhoneCluster c;
    c.phone.canonical = phone;
    for (const auto& p : posts) c.posts.push_back(doc(p));
    return c;
  }
};

}  // namespace

TEST(Cluster, ProfileDocumentFrequency) {
  Vocabulary v;
  std::vector<TokenSet> sets = {v.make_set({"herbal", "pills", "promo"}), v.make_set({"herbal", "pills", "cheap"}),
                                v.make_set({"herbal", "pills", "order"}), v.make_set({"herbal", "discount"})};
  const auto p = build_token_profile({}, sets, v, Thresholds{});
  EXPECT_EQ(p.tokens, (std::vector<std::string>{"herbal", "pills"}));
  EXPECT_DOUBLE_EQ(p.doc_frequency.at("herbal"), 1.0);
  EXPECT_DOUBLE_EQ(p.doc_frequency.at("pills"), 0.75);

  std::vector<TokenSet> one = {v.make_set({"a", "b", "c"})};
  EXPECT_EQ(build_token_profile({}, one, v, Thresholds{}).tokens.size(), 3u);

  std::vector<TokenSet> disjoint = {v.make_set({"a"}), v.make_set({"b"}), v.make_set({"c"}), v.make_set({"d"})};
  EXPECT_TRUE(build_token_profile({}, disjoint, v, Thresholds{}).tokens.empty());
  EXPECT_THROW(build_token_profile({}, std::vector<TokenSet>{}, v, Thresholds{}), Error);
}

TEST(Cluster, AssignmentBoundary) {
  Vocabulary v;
  std::vector<TokenSet> prof3 = {v.make_set({"a", "b", "c"})};
  std::vector<TokenSet> prof4 = {v.make_set({"a", "b", "c", "d"})};
  const auto p3 = build_token_profile({}, prof3, v, Thresholds{});
  const auto p4 = build_token_profile({}, prof4, v, Thresholds{});
  const std::vector<std::size_t> cand = {0, 1};
  const std::vector<TokenSet> posts = {v.make_set({"a", "x"}), v.make_set({"y", "z"})};
  const auto c3 = assign_posts_to_phone(p3, cand, posts, Thresholds{});
  EXPECT_EQ(c3.posts, (std::vector<std::size_t>{0}));
  const auto c4 = assign_posts_to_phone(p4, cand, posts, Thresholds{});
  EXPECT_TRUE(c4.posts.empty());
}

TEST(Cluster, EmptyProfileAdmitsEverything) {
  Vocabulary v;
  std::vector<TokenSet> disjoint = {v.make_set({"a"}), v.make_set({"b"}), v.make_set({"c"}), v.make_set({"d"})};
  const auto p = build_token_profile({}, disjoint, v, Thresholds{});
  const std::vector<std::size_t> cand = {0, 1, 2, 3};
  const auto c = assign_posts_to_phone(p, cand, disjoint, Thresholds{});
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.posts.size(), 4u);
}

TEST(Cluster, PairSimilarityOracle) {
  Fixture f;
  const auto c1 = f.cluster("1", {{"a", "b", "c"}, {"a", "b", "d"}});
  const auto c2 = f.cluster("2", {{"a", "b", "c"}, {"a", "b", "e"}});
  EXPECT_DOUBLE_EQ(phone_pair_similarity(c1, c2, f.docs, Thresholds{}), 0.625);
  EXPECT_DOUBLE_EQ(phone_pair_similarity(c2, c1, f.docs, Thresholds{}), 0.625);

  const auto s1 = f.cluster("3", {{"x", "y"}});
  const auto s2 = f.cluster("4", {{"x", "y"}});
  EXPECT_DOUBLE_EQ(phone_pair_similarity(s1, s2, f.docs, Thresholds{}), 1.0);
  EXPECT_DOUBLE_EQ(phone_pair_similarity(c1, s1, f.docs, Thresholds{}), 0.0);

  // 0.625 <= 0.7 keeps them apart.
  const std::vector<PhoneCluster> both = {c1, c2};
  EXPECT_EQ(merge_phone_clusters(both, f.docs, Thresholds{}).size(), 2u);
  const std::vector<PhoneCluster> same = {s1, s2};
  const auto merged = merge_phone_clusters(same, f.docs, Thresholds{});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].phones.size(), 2u);
}

TEST(Cluster, SingleLinkageChains) {
  Fixture f;
  // A~B and B~C above 0.7, A~C below.
  const std::vector<std::string> base = {"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10"};
  auto shift = [&](int k) {
    std::vector<std::string> s(base.begin() + k, base.end());
    for (int i = 0; i < k; ++i) s.push_back("z" + std::to_string(i));
    return s;
  };
  const std::vector<PhoneCluster> cs = {f.cluster("A", {shift(0)}), f.cluster("B", {shift(1)}), f.cluster("C", {shift(2)})};
  EXPECT_GT(phone_pair_similarity(cs[0], cs[1], f.docs, Thresholds{}), 0.7);
  EXPECT_GT(phone_pair_similarity(cs[1], cs[2], f.docs, Thresholds{}), 0.7);
  EXPECT_LE(phone_pair_similarity(cs[0], cs[2], f.docs, Thresholds{}), 0.7);
  const auto merged = merge_phone_clusters(cs, f.docs, Thresholds{});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].phones.size(), 3u);
}

TEST(Cluster, AggregateModeUsesUnionSets) {
  Fixture f;
  const auto c1 = f.cluster("1", {{"a", "b"}, {"c"}});
  const auto c2 = f.cluster("2", {{"a", "b", "c"}});
  Thresholds thr;
  thr.similarity_mode = SimilarityMode::aggregate;
  EXPECT_DOUBLE_EQ(phone_pair_similarity(c1, c2, f.docs, thr), 1.0);
}

TEST(Cluster, SampledSimilarityIsDeterministic) {
  Fixture f;
  std::vector<std::vector<std::string>> a, b;
  for (int i = 0; i < 150; ++i) {
    a.push_back({"x", "y", "a" + std::to_string(i % 7)});
    b.push_back({"x", "z", "a" + std::to_string(i % 5)});
  }
  const auto c1 = f.cluster("1", a), c2 = f.cluster("2", b);
  Thresholds thr;
  thr.pair_sample_cap = 1000;  // 22,500 pairs, so sampled
  const double s1 = phone_pair_similarity(c1, c2, f.docs, thr);
  EXPECT_EQ(s1, phone_pair_similarity(c1, c2, f.docs, thr));
  thr.pair_sample_cap = 100000;
  EXPECT_NEAR(s1, phone_pair_similarity(c1, c2, f.docs, thr), 0.05);
}

TEST(Cluster, SilhouettePerfectSeparation) {
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto s = mean_silhouette(labels, [&](std::size_t i, std::size_t j) { return labels[i] == labels[j] ? 0.0 : 1.0; });
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(*s, 1.0);
  const std::vector<int> one = {0, 0, 0};
  EXPECT_FALSE(mean_silhouette(one, [](std::size_t, std::size_t) { return 0.0; }));
}

TEST(Cluster, IdenticalPostsGiveUndefinedSilhouette) {
  Corpus c;
  std::vector<PostSpec> posts;
  for (int i = 0; i < 6; ++i)
    posts.push_back({"p" + std::to_string(i), "TW", "u", i + 1, std::string("herbal pills call ") + (i % 2 ? "18885512881" : "18005495301")});
  ingest_posts(c, posts);
  const auto r = cluster_corpus(c, {}, Thresholds{});
  ASSERT_EQ(r.partition.campaigns.size(), 1u);
  const std::vector<double> grid = {0.7};
  const auto sw = silhouette_sweep(r.clusters, r.docs, grid, Thresholds{});
  EXPECT_FALSE(sw[0].mean);
}

TEST(Cluster, VerifiedPhonesExcluded) {
  Corpus c;
  std::vector<PostSpec> posts = {{"v", "TW", "brand", 1, "official support call 18885512881", {}, {}, true}};
  for (int i = 0; i < 100; ++i)
    posts.push_back({"p" + std::to_string(i), "TW", "u" + std::to_string(i % 7), i + 2, "official support call 18885512881"});
  posts.push_back({"k", "TW", "x", 500, "cheap pills call 18005495301"});
  ingest_posts(c, posts);
  const auto excluded = filter_verified_phones(c);
  EXPECT_EQ(excluded, (std::set<std::string>{"18885512881"}));
  const auto r = cluster_corpus(c, excluded, Thresholds{});
  for (const auto& camp : r.partition.campaigns)
    for (const auto& p : camp.phones) EXPECT_EQ(excluded.count(p.canonical), 0u);
  EXPECT_TRUE(filter_verified_phones(Corpus{}).empty());
}

TEST(Cluster, CampaignIdsStableAndPartitioned) {
  Corpus c;
  ingest_posts(c, {{"1", "TW", "a", 1, "herbal pills cheap call 18885512881"},
                   {"2", "FB", "b", 2, "herbal pills cheap call 18005495301"},
                   {"3", "TW", "c", 3, "loan offer fast approval call 12125550123"}});
  const auto r = cluster_corpus(c, {}, Thresholds{});
  ASSERT_EQ(r.partition.campaigns.size(), 2u);
  std::map<PostKey, int> seen;
  for (const auto& camp : r.partition.campaigns) {
    std::vector<std::string> phones;
    for (const auto& p : camp.phones) phones.push_back(p.canonical);
    EXPECT_EQ(camp.campaign_id, campaign_id_for(phones));
    for (const auto& k : camp.post_ids) ++seen[k];
  }
  for (const auto& [k, n] : seen) EXPECT_EQ(n, 1);
  EXPECT_EQ(seen.size(), 3u);
}

TEST(ClusterProperty, JaccardBoundsAndSymmetry) {
  std::mt19937_64 rng(9);
  Vocabulary v;
  for (int i = 0; i < 2000; ++i) {
    std::set<std::string> a, b;
    for (int k = 0; k < static_cast<int>(rng() % 8); ++k) a.insert(std::string(1, static_cast<char>('a' + rng() % 10)));
    for (int k = 0; k < static_cast<int>(rng() % 8); ++k) b.insert(std::string(1, static_cast<char>('a' + rng() % 10)));
    std::set<std::string> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(inter, inter.end()));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(uni, uni.end()));
    const double oracle = uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    const auto sa = v.make_set({a.begin(), a.end()}), sb = v.make_set({b.begin(), b.end()});
    const double j = jaccard(sa, sb);
    EXPECT_DOUBLE_EQ(j, oracle);
    EXPECT_DOUBLE_EQ(j, jaccard(sb, sa));
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
  }
}

TEST(ClusterProperty, DeterministicAndMonotoneInMergeThreshold) {
  const auto spec = make_planted_spec(4, 2, 60, 0.3, 77);
  const auto synth = generate_corpus(spec);
  Corpus c;
  ingest_lines(c, synth.posts);
  std::size_t prev = 0;
  for (double t : {0.0, 0.2, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    Thresholds thr;
    thr.jaccard_merge = t;
    const auto a = cluster_corpus(c, {}, thr);
    const auto b = cluster_corpus(c, {}, thr);
    std::string ja, jb;
    for (const auto& x : a.partition.campaigns) ja += to_json(x).dump();
    for (const auto& x : b.partition.campaigns) jb += to_json(x).dump();
    EXPECT_EQ(ja, jb);
    EXPECT_EQ(a.partition.doc_campaign, b.partition.doc_campaign);
    EXPECT_GE(a.partition.campaigns.size(), prev) << "threshold " << t;
    prev = a.partition.campaigns.size();
  }
}

// ---------------------------------------------------------------------------
// labeler

namespace {

Campaign campaign_of(const Corpus& c) {
  const auto r = cluster_corpus(c, {}, Thresholds{});
  EXPECT_EQ(r.partition.campaigns.size(), 1u);
  return r.partition.campaigns.at(0);
}

}  // namespace

TEST(Labeler, FlagRules) {
  Corpus c;
  ingest_posts(c, {{"1", "TW", "a", 1, "cheap pills call 18885512881"}, {"2", "FB", "b", 2, "cheap pills call 18885512881"}});
  snapshot(c, {status_line("TW", "a", "active", 5), status_line("FB", "b", "active", 5)});
  const auto camp = campaign_of(c);

  DncList dnc;
  dnc.phones = {"8885512881"};
  auto f = flag_spam(camp, dnc, c);
  EXPECT_TRUE(f.auto_flag);
  ASSERT_EQ(f.reasons.size(), 1u);
  EXPECT_EQ(f.reasons[0].kind, FlagReasonKind::dnc_phone);

  f = flag_spam(camp, DncList{}, c);
  EXPECT_FALSE(f.auto_flag);

  snapshot(c, {status_line("FB", "b", "suspended", 9)});
  f = flag_spam(camp, DncList{}, c);
  EXPECT_TRUE(f.auto_flag);
  ASSERT_EQ(f.reasons.size(), 1u);
  EXPECT_EQ(f.reasons[0].kind, FlagReasonKind::suspended_account);

  // Monotone: adding a DNC phone on top keeps it flagged.
  EXPECT_TRUE(flag_spam(camp, dnc, c).auto_flag);
  EXPECT_EQ(flag_spam(camp, dnc, c).reasons.size(), 2u);
}

TEST(Labeler, DncFileFormat) {
  TempDir dir("dnc");
  write_file(dir.str("dnc.txt"), "# complaints\n1-888-551-2881\n\n12\n");
  const auto d = DncList::load(dir.str("dnc.txt"));
  EXPECT_EQ(d.phones, (std::set<std::string>{"18885512881"}));
  EXPECT_EQ(d.rejected_entries, 1u);
}

TEST(Labeler, Eligibility) {
  Campaign c;
  c.post_ids.resize(5000);
  EXPECT_TRUE(eligible_for_characterization(c, Thresholds{}));
  c.post_ids.resize(4999);
  EXPECT_FALSE(eligible_for_characterization(c, Thresholds{}));
  Thresholds small;
  small.min_campaign_posts = 10;
  c.post_ids.resize(12);
  EXPECT_TRUE(eligible_for_characterization(c, small));
}

TEST(Labeler, ReviewLabels) {
  std::vector<Campaign> cs(1);
  cs[0].campaign_id = "cmp-1";
  ReviewLog log;
  const auto a = apply_review_label(cs, log, {"cmp-1", CampaignLabel::spam, "Product Marketing", "ana", 1});
  EXPECT_EQ(a.label, CampaignLabel::spam);
  EXPECT_EQ(a.topic, "Product Marketing");
  const auto b = apply_review_label(cs, log, {"cmp-1", CampaignLabel::benign, "", "ana", 2});
  EXPECT_EQ(b.label, CampaignLabel::benign);
  EXPECT_EQ(log.history("cmp-1").size(), 2u);
  EXPECT_EQ(log.active("cmp-1")->verdict, CampaignLabel::benign);
  try {
    apply_review_label(cs, log, {"cmp-x", CampaignLabel::spam, "t", "ana", 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_campaign);
  }
}

TEST(LabelerProperty, HistoryReplayReproducesActiveLabel) {
  TempDir dir("labels");
  std::mt19937_64 rng(4);
  std::vector<Campaign> cs(5);
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i].campaign_id = "cmp-" + std::to_string(i);
  {
    ReviewLog log(dir.str("labels.jsonl"));
    for (int i = 0; i < 200; ++i) {
      ReviewLabel l{cs[rng() % 5].campaign_id, rng() % 2 ? CampaignLabel::spam : CampaignLabel::benign,
                    "topic" + std::to_string(rng() % 3), "r", i};
      const auto before = log.total_entries();
      apply_review_label(cs, log, l);
      EXPECT_GE(log.total_entries(), before);
    }
  }
  ReviewLog replayed(dir.str("labels.jsonl"));
  std::vector<Campaign> fresh = cs;
  for (auto& c : fresh) {
    c.label = CampaignLabel::unreviewed;
    c.topic.reset();
  }
  replayed.apply_to(fresh);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    EXPECT_EQ(fresh[i].label, cs[i].label);
    EXPECT_EQ(fresh[i].topic, cs[i].topic);
  }
}
