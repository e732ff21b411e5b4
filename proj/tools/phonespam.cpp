// phonespam: command-line front end for the campaign toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <csignal>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "phonespam/http_server.hpp"
#include "phonespam/phonespam.hpp"

namespace ps = phonespam;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::string data_dir = "phonespam-data";
  std::string country_table;
  std::string keywords;
};

struct StageFiles {
  std::string dnc, blacklist, actors;
  std::vector<std::string> statuses;
};

ps::Thresholds thresholds(const Globals& g) { return g.config.empty() ? ps::Thresholds{} : ps::load_thresholds(g.config); }

ps::Corpus open_corpus(const Globals& g) {
  ps::IngestConfig cfg;
  if (!g.country_table.empty()) cfg.table = ps::CountryTable::load(g.country_table);
  if (!g.keywords.empty()) cfg.keywords = ps::read_list_file(g.keywords);
  return ps::Corpus::open(g.data_dir, std::move(cfg));
}

ps::PipelineInputs pipeline_inputs(const StageFiles& f, std::vector<std::string> posts = {}) {
  ps::PipelineInputs in;
  in.post_files = std::move(posts);
  in.status_files = f.statuses;
  if (!f.dnc.empty()) in.dnc_path = f.dnc;
  if (!f.blacklist.empty()) in.blacklist_path = f.blacklist;
  if (!f.actors.empty()) in.actors_path = f.actors;
  return in;
}

std::string labels_path(const Globals& g) { return (fs::path(g.data_dir) / "labels.jsonl").string(); }

void print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void add_stage_files(CLI::App* cmd, StageFiles& f) {
  cmd->add_option("--dnc", f.dnc, "Do-Not-Call list (one phone per line)")->check(CLI::ExistingFile);
  cmd->add_option("--blacklist", f.blacklist, "domain blacklist (one domain per line)")->check(CLI::ExistingFile);
  cmd->add_option("--actors", f.actors, "engagement-actor sidecar (JSON Lines)")->check(CLI::ExistingFile);
  cmd->add_option("--statuses", f.statuses, "account status snapshot files")->check(CLI::ExistingFile);
}

ps::HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phone-number spam campaign toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "thresholds JSON")->check(CLI::ExistingFile);
  app.add_option("--data-dir", g.data_dir, "corpus and run directory");
  app.add_option("--country-table", g.country_table, "calling-code table JSON")->check(CLI::ExistingFile);
  app.add_option("--keywords", g.keywords, "collection keyword list")->check(CLI::ExistingFile);

  std::vector<std::string> files;
  StageFiles sf;
  std::string campaign, out_dir, format = "both", truth, spec_file, verdict, topic, reviewer, host = "127.0.0.1",
                        static_dir;
  int port = 8080;
  bool silhouette = false;
  std::size_t n_campaigns = 10, n_phones = 3, n_posts = 500, noise = 0;
  double overlap = 0.0;
  std::uint64_t seed = 1;

  auto* ingest = app.add_subcommand("ingest", "ingest post JSON Lines files into the corpus");
  ingest->add_option("files", files, "post files")->required()->check(CLI::ExistingFile);

  auto* snapshot = app.add_subcommand("snapshot", "record account status snapshots");
  snapshot->add_option("files", files, "status files")->required()->check(CLI::ExistingFile);

  auto* cluster = app.add_subcommand("cluster", "form campaigns from the stored corpus");
  cluster->add_flag("--silhouette", silhouette, "also sweep the merge threshold and report silhouettes");

  auto* flag = app.add_subcommand("flag", "auto-flag campaigns (DNC list, suspended accounts)");
  add_stage_files(flag, sf);

  auto* metrics = app.add_subcommand("metrics", "per-campaign characterization metrics");
  metrics->add_option("--campaign", campaign, "only this campaign id");
  add_stage_files(metrics, sf);

  auto* identities = app.add_subcommand("identities", "identity clusters and savings estimate");
  identities->add_option("--campaign", campaign, "only this campaign id");
  add_stage_files(identities, sf);

  auto* report = app.add_subcommand("report", "run the pipeline and export the report");
  report->add_option("--out", out_dir, "output directory")->required();
  report->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  add_stage_files(report, sf);

  auto* run = app.add_subcommand("run", "ingest inputs and run every stage");
  run->add_option("--input", files, "post files")->check(CLI::ExistingFile);
  add_stage_files(run, sf);

  auto* label = app.add_subcommand("label", "record a review verdict for a campaign");
  label->add_option("--campaign", campaign, "campaign id")->required();
  label->add_option("--verdict", verdict, "spam or benign")->required()->check(CLI::IsMember({"spam", "benign"}));
  label->add_option("--topic", topic, "campaign topic");
  label->add_option("--reviewer", reviewer, "reviewer name");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--spec", spec_file, "SynthSpec JSON")->check(CLI::ExistingFile);
  synth->add_option("--campaigns", n_campaigns, "planted campaigns");
  synth->add_option("--phones", n_phones, "phones per campaign");
  synth->add_option("--posts", n_posts, "posts per campaign");
  synth->add_option("--overlap", overlap, "shared vocabulary fraction")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--noise", noise, "benign-phone and phoneless noise posts (each)");
  synth->add_option("--seed", seed, "generator seed");

  auto* evaluate = app.add_subcommand("evaluate", "score the corpus clustering against ground truth");
  evaluate->add_option("--truth", truth, "truth.json from synth")->required()->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "serve the triage JSON API");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port")->check(CLI::Range(1, 65535));
  serve->add_option("--static", static_dir, "static UI directory")->check(CLI::ExistingDirectory);
  add_stage_files(serve, sf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto thr = thresholds(g);
    if (*ingest) {
      auto corpus = open_corpus(g);
      auto out = nlohmann::json::array();
      for (const auto& f : files) out.push_back(ps::to_json(corpus.ingest_file(f)));
      print(out);
    } else if (*snapshot) {
      auto corpus = open_corpus(g);
      auto out = nlohmann::json::array();
      for (const auto& f : files) out.push_back(ps::to_json(corpus.snapshot_accounts(f)));
      print(out);
    } else if (*cluster) {
      auto corpus = open_corpus(g);
      const auto excluded = ps::filter_verified_phones(corpus);
      const auto r = ps::cluster_corpus(corpus, excluded, thr);
      auto cs = nlohmann::json::array();
      for (const auto& c : r.partition.campaigns) cs.push_back(ps::to_json(c));
      nlohmann::json out{{"campaigns", std::move(cs)},
                         {"phone_clusters", r.clusters.size()},
                         {"excluded_phones", r.excluded_phones},
                         {"degenerate_profiles", r.degenerate_profiles}};
      if (silhouette) {
        const std::vector<double> grid = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
        auto pts = nlohmann::json::array();
        for (const auto& p : ps::silhouette_sweep(r.clusters, r.docs, grid, thr))
          pts.push_back({{"threshold", p.threshold},
                         {"mean", ps::opt_json(p.mean)},
                         {"campaigns", p.campaigns},
                         {"scored_posts", p.scored_posts}});
        out["silhouette"] = std::move(pts);
      }
      print(out);
    } else if (*flag || *metrics || *identities) {
      auto corpus = open_corpus(g);
      ps::ReviewLog log(labels_path(g));
      const auto r = ps::run_pipeline(corpus, pipeline_inputs(sf), thr, &log);
      auto out = nlohmann::json::array();
      for (const auto& c : r.campaigns) {
        if (!campaign.empty() && c.campaign.campaign_id != campaign) continue;
        if (*flag) {
          auto j = ps::to_json(c.flag);
          j["campaign_id"] = c.campaign.campaign_id;
          out.push_back(std::move(j));
        } else if (*metrics) {
          out.push_back(ps::to_json(c.metrics));
        } else {
          auto j = ps::to_json(c.identities);
          j["campaign_id"] = c.campaign.campaign_id;
          out.push_back(std::move(j));
        }
      }
      if (!campaign.empty() && out.empty()) throw ps::Error(ps::ErrorCode::unknown_campaign, campaign);
      if (*identities) {
        print({{"run_id", r.run_id},
               {"campaigns", std::move(out)},
               {"suspension", ps::to_json(r.identity_suspension)},
               {"savings", r.savings ? ps::to_json(*r.savings) : nlohmann::json(nullptr)}});
      } else {
        print({{"run_id", r.run_id}, {"campaigns", std::move(out)}});
      }
    } else if (*report || *run) {
      auto corpus = open_corpus(g);
      ps::ReviewLog log(labels_path(g));
      const auto r = ps::run_pipeline(corpus, pipeline_inputs(sf, *run ? files : std::vector<std::string>{}), thr, &log);
      const auto dir = ps::persist_run(r, g.data_dir);
      if (*report) {
        fs::create_directories(out_dir);
        if (format != "csv") ps::write_file((fs::path(out_dir) / "report.json").string(), ps::build_report(r).dump(2) + "\n");
        if (format != "json") ps::write_file((fs::path(out_dir) / "report.csv").string(), ps::build_report_csv(r));
      }
      auto summary = ps::run_summary_json(r);
      summary["artifacts"] = dir.string();
      print(summary);
    } else if (*label) {
      auto corpus = open_corpus(g);
      ps::ReviewLog log(labels_path(g));
      const auto r = ps::run_pipeline(corpus, pipeline_inputs(sf), thr, &log);
      std::vector<ps::Campaign> cs;
      for (const auto& c : r.campaigns) cs.push_back(c.campaign);
      ps::ReviewLabel l;
      l.campaign_id = campaign;
      l.verdict = *ps::parse_campaign_label(verdict);
      l.topic = topic;
      l.reviewer = reviewer;
      l.reviewed_at = static_cast<ps::Timestamp>(std::time(nullptr));
      print(ps::to_json(ps::apply_review_label(cs, log, l)));
    } else if (*synth) {
      const auto spec = spec_file.empty()
                            ? [&] {
                                auto s = ps::make_planted_spec(n_campaigns, n_phones, n_posts, overlap, seed);
                                s.benign_phone_noise = noise;
                                s.phoneless_noise = noise;
                                return s;
                              }()
                            : ps::synth_spec_from_json(nlohmann::json::parse(ps::read_file(spec_file)));
      const auto corpus = ps::generate_corpus(spec);
      ps::write_synth_corpus(corpus, out_dir);
      print({{"out", out_dir},
             {"posts", corpus.posts.size()},
             {"statuses", corpus.statuses.size()},
             {"engagement_actors", corpus.actors.size()},
             {"planted_posts", corpus.truth.post_campaign.size()}});
    } else if (*evaluate) {
      auto corpus = open_corpus(g);
      const auto t = ps::ground_truth_from_json(nlohmann::json::parse(ps::read_file(truth)));
      const auto r = ps::cluster_corpus(corpus, ps::filter_verified_phones(corpus), thr);
      print(ps::to_json(ps::evaluate_clustering(ps::predicted_labels(r), t.post_campaign)));
    } else if (*serve) {
      auto corpus = open_corpus(g);
      ps::ReviewLog log(labels_path(g));
      auto r = ps::run_pipeline(corpus, pipeline_inputs(sf), thr, &log);
      ps::persist_run(r, g.data_dir);
      ps::TriageService service(corpus, std::move(r), log);
      ps::HttpServer server(service, static_dir.empty() ? std::nullopt : std::optional<std::string>(static_dir));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving run " << service.run_id() << " on http://" << host << ":" << port << "\n";
      server.listen(host, port);
    }
  } catch (const ps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
