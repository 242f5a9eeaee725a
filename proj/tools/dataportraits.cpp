// Command line front end: ingest, train, graph, recommend, serve, simulate, evaluate.
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dataportraits/corpus.hpp"
#include "dataportraits/lda.hpp"
#include "dataportraits/portrait.hpp"
#include "dataportraits/recommender.hpp"
#include "dataportraits/service.hpp"
#include "dataportraits/synth.hpp"
#include "dataportraits/topic_graph.hpp"

namespace dp = dataportraits;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

dp::StopwordList stopwords_from(const std::string& path) {
  return path.empty() ? dp::StopwordList::builtin() : dp::StopwordList::load(path);
}

dp::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data portraits: topic models, intermediary-topic recommendations and the experiment service"};
  app.require_subcommand(1);

  // ingest
  std::string in_path, out_dir, stopwords_path, profiles_path;
  auto* ingest = app.add_subcommand("ingest", "Parse NDJSON tweets into a corpus directory");
  ingest->add_option("--input", in_path, "NDJSON tweets")->required();
  ingest->add_option("--out", out_dir, "Corpus directory")->required();
  ingest->add_option("--stopwords", stopwords_path, "Stopword list, one per line (default: built-in es+en)");
  ingest->add_option("--profiles", profiles_path, "NDJSON user profiles");

  // train
  std::string corpus_dir, model_path;
  dp::ModelConfig mcfg;
  double alpha = 0;
  auto* trainc = app.add_subcommand("train", "Fit the LDA topic model");
  trainc->add_option("--corpus", corpus_dir)->required();
  trainc->add_option("--k", mcfg.k, "Number of topics")->check(CLI::PositiveNumber);
  trainc->add_option("--iters", mcfg.iterations, "Gibbs sweeps");
  trainc->add_option("--burn-in", mcfg.burn_in);
  trainc->add_option("--alpha", alpha, "Dirichlet prior on topics (default 50/k)");
  trainc->add_option("--beta", mcfg.beta);
  trainc->add_option("--seed", mcfg.rng_seed);
  trainc->add_option("--out", model_path)->required();

  // graph
  std::string graph_path, method_name = "weighted_closeness";
  double epsilon = 0.01;
  auto* graphc = app.add_subcommand("graph", "Build the topic graph and intermediary topics");
  graphc->add_option("--model", model_path)->required();
  graphc->add_option("--epsilon", epsilon);
  graphc->add_option("--method", method_name, "weighted_closeness or current_flow_closeness");
  graphc->add_option("--out", graph_path)->required();

  // recommend
  std::string target, algorithm_name = "IT", recs_path;
  dp::RecConfig rcfg;
  auto* recc = app.add_subcommand("recommend", "Recommend accounts for one user");
  recc->add_option("--corpus", corpus_dir)->required();
  recc->add_option("--model", model_path)->required();
  recc->add_option("--graph", graph_path)->required();
  recc->add_option("--target", target)->required();
  recc->add_option("--algorithm", algorithm_name, "IT or KLD");
  recc->add_option("--gamma", rcfg.gamma);
  recc->add_option("--top-n", rcfg.top_n);
  recc->add_option("--window-hours", rcfg.candidate_window_hours);
  recc->add_option("--out", recs_path, "Output file (default: stdout)");

  // serve
  int port = 8080;
  std::string host = "127.0.0.1", state_dir, political_path;
  std::uint64_t seed = 1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--corpus", corpus_dir)->required();
  serve->add_option("--model", model_path)->required();
  serve->add_option("--graph", graph_path)->required();
  serve->add_option("--port", port, "0 picks a free port");
  serve->add_option("--host", host);
  serve->add_option("--seed", seed, "Experiment assignment seed");
  serve->add_option("--state", state_dir, "Directory for conditions and events (default: in memory)");
  serve->add_option("--political", political_path, "Political keyword list");

  // simulate
  std::string spec_path;
  auto* sim = app.add_subcommand("simulate", "Generate the planted two-community corpus");
  sim->add_option("--spec", spec_path, "Spec JSON (missing fields use defaults)");
  sim->add_option("--out", out_dir)->required();

  // evaluate
  std::string labels_path, report_path;
  std::vector<std::uint64_t> seeds;
  auto eval_cfg = dp::synth::default_evaluation_config();
  auto* eval = app.add_subcommand("evaluate", "Cross-community fraction of IT and KLD recommendations");
  eval->add_option("--corpus", corpus_dir)->required();
  eval->add_option("--labels", labels_path)->required();
  eval->add_option("--gamma", eval_cfg.rec.gamma);
  eval->add_option("--top-n", eval_cfg.rec.top_n);
  eval->add_option("--k", eval_cfg.model.k);
  eval->add_option("--iters", eval_cfg.model.iterations);
  eval->add_option("--seeds", seeds, "LDA seeds, one report row each")->delimiter(',');
  eval->add_option("--report", report_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const dp::Tokenizer tokenizer(stopwords_from(stopwords_path));
      auto result = dp::ingest(in_path, tokenizer, profiles_path);
      dp::save_corpus(result.corpus, result.report, out_dir);
      std::cerr << "ingested " << result.report.loaded << " tweets from " << result.corpus.user_count()
                << " users, skipped " << result.report.skipped << " of " << result.report.lines << " lines\n";
      for (const auto& w : result.report.warnings) std::cerr << "  " << w << '\n';
    } else if (*trainc) {
      if (alpha > 0) mcfg.alpha = alpha;
      if (mcfg.burn_in >= mcfg.iterations) mcfg.burn_in = mcfg.iterations / 5;
      const dp::Corpus corpus = dp::load_corpus(corpus_dir);
      dp::TrainOptions opts;
      opts.on_sweep = [&](const dp::SweepStats& s) {
        if ((s.iteration + 1) % 50 == 0) std::cerr << "sweep " << s.iteration + 1 << '/' << mcfg.iterations << '\n';
      };
      auto result = dp::train(corpus, mcfg, opts);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      dp::save_model(result.model, model_path);
    } else if (*graphc) {
      const auto model = dp::load_model(model_path);
      const auto method = dp::parse_centrality_method(method_name);
      const auto vectors = model.doc_vectors();
      const auto graph = dp::build_graph(vectors, epsilon);
      const auto itset = dp::intermediary_topics(graph, method);
      write_file(graph_path, dp::graph_to_json(graph, itset, method));
      std::cerr << graph.edges.size() << " edges, " << itset.topic_ids.size() << " intermediary topics\n";
    } else if (*recc) {
      rcfg.algorithm = dp::parse_algorithm(algorithm_name);
      rcfg.validate();
      const dp::Corpus corpus = dp::load_corpus(corpus_dir);
      const auto model = dp::load_model(model_path);
      auto bundle = dp::graph_from_json(read_file(graph_path));
      const dp::Recommender recommender(corpus, model, std::move(bundle.intermediary));
      const auto recs = recommender.recommend(target, rcfg);
      const auto clusters = dp::cluster(recs, model);
      const std::string out = dp::recommendations_to_json(target, rcfg.algorithm, rcfg, recs, clusters).dump(2) + "\n";
      if (recs_path.empty()) std::cout << out;
      else write_file(recs_path, out);
    } else if (*serve) {
      dp::ServiceConfig scfg;
      scfg.seed = seed;
      scfg.state_dir = state_dir;
      auto political = political_path.empty() ? dp::PoliticalKeywords(std::vector<std::string>{}) : dp::PoliticalKeywords::load(political_path);
      dp::Service service(dp::load_corpus(corpus_dir), dp::load_model(model_path),
                          dp::graph_from_json(read_file(graph_path)), std::move(political), scfg);
      dp::HttpServer server(service);
      const int bound = server.bind(host, port);
      if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
      std::cout << "listening on " << host << ':' << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.listen();
      g_server = nullptr;
    } else if (*sim) {
      const auto spec = spec_path.empty() ? dp::synth::SynthSpec{} : dp::synth::spec_from_json(json::parse(read_file(spec_path)));
      const auto corpus = dp::synth::generate(spec);
      dp::synth::write_synth(corpus, spec, out_dir);
      std::cerr << corpus.labels.size() << " users, " << corpus.tweets.size() << " tweets\n";
    } else if (*eval) {
      if (seeds.empty()) seeds.push_back(eval_cfg.model.rng_seed);
      if (eval_cfg.model.burn_in >= eval_cfg.model.iterations) eval_cfg.model.burn_in = eval_cfg.model.iterations / 5;
      const dp::Corpus corpus = dp::load_corpus(corpus_dir);
      const auto labels = dp::synth::load_labels(labels_path);
      json rows = json::array();
      double it_sum = 0, kld_sum = 0;
      for (auto s : seeds) {
        auto cfg = eval_cfg;
        cfg.model.rng_seed = s;
        const auto trial = dp::synth::evaluate_corpus(corpus, labels, cfg);
        it_sum += trial.it.cross_fraction;
        kld_sum += trial.kld.cross_fraction;
        rows.push_back(dp::synth::trial_to_json(trial));
        std::cerr << "seed " << s << ": IT " << trial.it.cross_fraction << ", KLD " << trial.kld.cross_fraction << '\n';
      }
      const double n = static_cast<double>(seeds.size());
      const json report = {{"gamma", eval_cfg.rec.gamma},
                           {"top_n", eval_cfg.rec.top_n},
                           {"k", eval_cfg.model.k},
                           {"mean_cross_community_fraction", {{"IT", it_sum / n}, {"KLD", kld_sum / n}}},
                           {"difference", (it_sum - kld_sum) / n},
                           {"per_seed", rows}};
      write_file(report_path, report.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
