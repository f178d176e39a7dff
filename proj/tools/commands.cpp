// Copyright 2026 The dyncomm Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyncomm/cli/config.hpp"
#include "dyncomm/cli/run_dir.hpp"
#include "dyncomm/eval/compare.hpp"
#include "dyncomm/eval/evaluate.hpp"
#include "dyncomm/graph/graph_io.hpp"
#include "dyncomm/graph/stats.hpp"
#include "dyncomm/nn/checkpoint.hpp"
#include "dyncomm/spr/evaluate.hpp"
#include "dyncomm/train/spr_trainer.hpp"

namespace dyncomm::tools {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Options shared by every command that reads a config.
struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string agg;
  std::string comm;
  std::string controller;
  int rounds = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* rounds_opt = nullptr;

  void attach(CLI::App* app, bool model_flags) {
    app->add_option("-c,--config", config, "JSON config (comments allowed)")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "Run seed");
    if (!model_flags) return;
    app->add_option("--agg", agg, "Aggregation: sum, mean, gcn, gat");
    app->add_option("--comm", comm, "Communication: max, controller, matched");
    app->add_option("--controller", controller, "on/off; shorthand for --comm controller|max")
        ->check(CLI::IsMember({"on", "off"}));
    rounds_opt = app->add_option("--rounds", rounds, "Communication rounds");
  }

  // Applies model overrides to an existing config document.
  void apply_model(nlohmann::json& j) const {
    if (!agg.empty()) j["model"]["aggregation"] = agg;
    if (!controller.empty()) j["model"]["communication"] = controller == "on" ? "controller" : "max";
    if (!comm.empty()) j["model"]["communication"] = comm;
    if (rounds_opt && rounds_opt->count()) j["model"]["rounds"] = rounds;
  }

  nlohmann::json load_json() const {
    nlohmann::json j = nlohmann::json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        j = nlohmann::json::parse(ss.str(), nullptr, true, true);
      } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError(config + ": " + ex.what());
      }
    }
    if (seed_opt && seed_opt->count()) j["seed"] = seed;
    apply_model(j);
    return j;
  }

  ExperimentConfig load() const { return config_from_json(load_json()); }
};

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::vector<Geo2DGraph> make_graphs(int n, const ExperimentConfig& c, std::string_view stream) {
  Rng rng = Rng::stream(c.seed, stream);
  std::vector<Geo2DGraph> gs;
  gs.reserve(n);
  for (int i = 0; i < n; ++i) gs.push_back(generate_graph(c.nodes, c.degree, rng, c.graphgen));
  return gs;
}

// --- gen-graphs -------------------------------------------------------------

struct GenGraphs {
  Common common;
  int count = -1;
  std::string out;
  bool labels = false;

  void attach(CLI::App* app) {
    common.attach(app, false);
    app->add_option("-n,--count", count, "Number of graphs (default eval.graphs)");
    app->add_option("-o,--out", out, "Output directory (default <run>/graphs)");
    app->add_flag("--labels", labels, "Embed APSP(delay) label matrices");
  }

  int run() {
    const ExperimentConfig c = common.load();
    const std::filesystem::path dir = make_run_dir("gen-graphs", c);
    const int n = count >= 0 ? count : c.eval.graphs;
    const auto graphs = make_graphs(n, c, "graphgen");
    const std::filesystem::path gdir = out.empty() ? dir / "graphs" : std::filesystem::path(out);
    save_graph_dir(gdir, graphs, labels);
    const BatchStats st = graph_stats(graphs);
    std::string csv = config_header(c) + "metric,min,max,mean,std\n";
    for (const auto& [name, s] : st.metrics) {
      csv += name + "," + fmt(s.min) + "," + fmt(s.max) + "," + fmt(s.mean) + "," + fmt(s.std) + "\n";
    }
    csv += "frac_paths_under_8_hops,,," + fmt(st.frac_paths_under_8_hops) + ",\n";
    write_file(dir / "stats.csv", csv);
    std::cout << gdir.string() << '\n';
    return 0;
  }
};

// --- train-spr / eval-spr -----------------------------------------------------

struct TrainSpr {
  Common common;
  int iters = -1;
  bool no_clip = false;
  bool stop_on_spike = false;

  void attach(CLI::App* app) {
    common.attach(app, true);
    app->add_option("--iters", iters, "Training iterations");
    app->add_flag("--no-clip", no_clip, "Disable gradient clipping");
    app->add_flag("--stop-on-spike", stop_on_spike, "Stop at the first validation spike");
  }

  int run() {
    nlohmann::json j = common.load_json();
    // The SPR task has its own round count.
    if (common.rounds_opt && common.rounds_opt->count()) j["spr"]["rounds"] = common.rounds;
    if (iters >= 0) j["spr"]["iterations"] = iters;
    if (no_clip) j["spr"]["clip"] = 0.0;
    if (stop_on_spike) j["spr"]["stop_on_spike"] = true;
    const ExperimentConfig c = config_from_json(j);
    const std::filesystem::path dir = make_run_dir("train-spr", c);
    log_line("train-spr: building dataset");
    const SprDataset ds = build_dataset(make_spr_data_config(c), c.seed);
    SprModel m(make_spr_node_config(c), c.nodes, c.degree);
    Rng init = Rng::stream(c.seed, "init");
    m.init(init);
    std::string csv = config_header(c) + "iteration,train_loss,val_mse,grad_norm\n";
    const SprTrainResult res = train_spr(m, ds, make_spr_train_config(c), c.seed, [&](const SprCurvePoint& p) {
      csv += std::to_string(p.iteration) + "," + fmt(p.train_loss) + "," + fmt(p.val_mse) + "," +
             fmt(p.grad_norm) + "\n";
      log_line("iter " + std::to_string(p.iteration) + " val_mse " + fmt(p.val_mse));
    });
    write_file(dir / "curve.csv", csv);
    nn::save_checkpoint(dir / "model.ckpt", {{"", &m.params}}, config_to_json(c).dump());
    nlohmann::ordered_json s;
    s["initial_val_mse"] = res.curve.front().val_mse;
    s["final_val_mse"] = res.curve.back().val_mse;
    s["spike_iteration"] = res.spike_iteration;
    write_file(dir / "summary.json", s.dump(2) + "\n");
    std::cout << dir.string() << '\n';
    return 0;
  }
};

struct EvalSpr {
  Common common;
  std::vector<std::string> checkpoints;
  std::vector<int> seq_lens;

  void attach(CLI::App* app) {
    common.attach(app, false);
    app->add_option("--checkpoint", checkpoints, "Trained model(s); one per training seed")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--seq-lens", seq_lens, "Sequence lengths (default spr.seq_lens)");
  }

  int run() {
    nlohmann::json j = common.load_json();
    if (!seq_lens.empty()) j["spr"]["seq_lens"] = seq_lens;
    const ExperimentConfig c = config_from_json(j);
    const std::filesystem::path dir = make_run_dir("eval-spr", c);
    const SprDataset ds = build_dataset(make_spr_data_config(c), c.seed);
    std::vector<std::unique_ptr<SprModel>> models;
    std::vector<SprModel*> ptrs;
    for (const auto& path : checkpoints) {
      const ExperimentConfig mc = parse_config(nn::read_checkpoint_meta(path));
      auto m = std::make_unique<SprModel>(make_spr_node_config(mc), mc.nodes, mc.degree);
      Rng init(0);
      m->init(init);
      nn::load_checkpoint(path, {{"", &m->params}});
      ptrs.push_back(m.get());
      models.push_back(std::move(m));
    }
    const auto rows = evaluate_spr(ptrs, ds.test, c.spr.seq_lens, c.spr.val_batch);
    std::string csv = config_header(c) + "seq_len,mean,std";
    for (std::size_t i = 0; i < ptrs.size(); ++i) csv += ",model_" + std::to_string(i);
    csv += "\n";
    for (const auto& r : rows) {
      csv += std::to_string(r.seq_len) + "," + fmt(r.mean) + "," + fmt(r.std);
      for (double v : r.per_model) csv += "," + fmt(v);
      csv += "\n";
    }
    write_file(dir / "mse.csv", csv);
    std::cout << dir.string() << '\n';
    return 0;
  }
};

// --- train-route / eval-route ---------------------------------------------------

struct TrainRoute {
  Common common;
  std::int64_t steps = -1;

  void attach(CLI::App* app) {
    common.attach(app, true);
    app->add_option("--steps", steps, "Environment steps");
  }

  int run() {
    nlohmann::json j = common.load_json();
    if (steps >= 0) j["dqn"]["total_steps"] = steps;
    const ExperimentConfig c = config_from_json(j);
    const std::filesystem::path dir = make_run_dir("train-route", c);
    const std::string meta = config_to_json(c).dump();
    RlTrainer trainer(make_rl_config(c), c.seed);
    std::string csv = config_header(c) + "step,loss,epsilon,reward_ma500,q_ma500,messages_ma500\n";
    trainer.run(
        [&](const RlLogRow& r) {
          csv += std::to_string(r.step) + "," + fmt(r.loss) + "," + fmt(r.epsilon) + "," +
                 fmt(r.reward_ma500) + "," + fmt(r.q_ma500) + "," + fmt(r.messages_ma500) + "\n";
          if (r.step % (100 * c.rl.log_every) == 0) {
            log_line("step " + std::to_string(r.step) + " reward_ma500 " + fmt(r.reward_ma500));
          }
        },
        [&](std::int64_t step) {
          trainer.agent().save(dir / ("agent_" + std::to_string(step) + ".ckpt"), meta);
        });
    write_file(dir / "train_log.csv", csv);
    trainer.agent().save(dir / "agent.ckpt", meta);
    std::cout << dir.string() << '\n';
    return 0;
  }
};

struct EvalRoute {
  Common common;
  std::string checkpoint;
  std::string graphs;
  std::string policy;
  int n_seeds = 0;
  bool trace = false;
  CLI::Option* seeds_opt = nullptr;

  void attach(CLI::App* app) {
    common.attach(app, true);
    app->add_option("--checkpoint", checkpoint, "Trained agent (learned policy)");
    app->add_option("--graphs", graphs, "Graph directory (default: eval.graphs fresh graphs)")
        ->check(CLI::ExistingDirectory);
    app->add_option("--policy", policy, "learned, random or oracle");
    seeds_opt = app->add_option("--seeds", n_seeds, "Use seeds 1..N")->check(CLI::PositiveNumber);
    app->add_flag("--trace", trace, "Write the first episode's trace as JSON lines");
  }

  int run() {
    nlohmann::json j = common.load_json();
    if (!policy.empty()) j["eval"]["policy"] = policy;
    if (seeds_opt->count()) {
      std::vector<std::uint64_t> s;
      for (int i = 1; i <= n_seeds; ++i) s.push_back(i);
      j["eval"]["seeds"] = s;
    }
    ExperimentConfig c = config_from_json(j);
    const PolicyKind kind = parse_policy(c.eval.policy);
    std::unique_ptr<RoutingAgent> agent;
    if (kind == PolicyKind::kLearned) {
      if (checkpoint.empty()) throw ConfigError("--checkpoint: required for the learned policy");
      if (!std::filesystem::exists(checkpoint)) throw std::runtime_error("missing checkpoint: " + checkpoint);
      // Architecture comes from the checkpoint; command-line model flags
      // still apply on top.
      nlohmann::json mj = nlohmann::json::parse(nn::read_checkpoint_meta(checkpoint));
      common.apply_model(mj);
      const ExperimentConfig mc = config_from_json(mj);
      c.node = mc.node;
      c.rl.q_encoder = mc.rl.q_encoder;
      const RlConfig rl = make_rl_config(c);
      agent = std::make_unique<RoutingAgent>(rl.node, q_config(rl));
      Rng init(0);
      agent->init(init);
      agent->load(checkpoint);
    }
    const std::filesystem::path dir = make_run_dir("eval-route", c);
    const std::vector<Geo2DGraph> gs =
        graphs.empty() ? make_graphs(c.eval.graphs, c, "eval-graphs") : load_graph_dir(graphs);
    if (gs.empty()) throw std::runtime_error("no graphs in " + graphs);
    const EvalConfig ec = make_eval_config(c);
    const PolicyEvaluation ev = evaluate_policy(gs, kind, agent.get(), ec, c.eval.seeds);

    std::string csv = config_header(c);
    csv += "# delay and spr_ratio exclude packets undelivered at the horizon\n";
    csv += "seed";
    for (auto name : kMetricNames) csv += "," + std::string(name);
    csv += ",episodes,steps,delivered,censored\n";
    auto row = [&](const std::string& label, const RoutingMetrics& m) {
      csv += label;
      for (auto name : kMetricNames) csv += "," + fmt(metric_value(m, name));
      csv += "," + std::to_string(m.episodes) + "," + std::to_string(m.steps) + "," +
             std::to_string(m.delivered) + "," + std::to_string(m.censored) + "\n";
    };
    for (std::size_t i = 0; i < ev.seeds.size(); ++i) row(std::to_string(ev.seeds[i]), ev.per_seed[i]);
    row("mean", ev.mean);
    row("std", ev.std);
    write_file(dir / "metrics.csv", csv);

    RunSummary summary{dir.filename().string(), ev.mean, ev.std};
    nlohmann::ordered_json sj = summary_to_json(summary);
    sj["policy"] = c.eval.policy;
    sj["round_rate"] = ev.round_rate;
    write_file(dir / "summary.json", sj.dump(2) + "\n");

    if (trace) {
      const EpisodeOutput o = run_episode(gs.front(), kind, agent.get(), ec,
                                          splitmix64(c.eval.seeds.front()), true);
      std::ostringstream os;
      write_trace_jsonl(os, o.trace);
      write_file(dir / "trace.jsonl", os.str());
    }
    std::cout << dir.string() << '\n';
    return 0;
  }
};

// --- compare -------------------------------------------------------------------

struct Compare {
  std::vector<std::string> runs;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("runs", runs, "eval-route run directories or summary.json files")
        ->required()
        ->expected(2, -1);
    app->add_option("-o,--out", out, "Write the JSON here as well as to stdout");
  }

  int run() {
    std::vector<RunSummary> summaries;
    for (const auto& r : runs) {
      std::filesystem::path p = r;
      if (std::filesystem::is_directory(p)) p /= "summary.json";
      std::ifstream in(p);
      if (!in) throw std::runtime_error("cannot read " + p.string());
      RunSummary s = summary_from_json(nlohmann::json::parse(in));
      if (s.name.empty()) s.name = r;
      summaries.push_back(std::move(s));
    }
    const std::string text = compare_runs(summaries).dump(2) + "\n";
    if (!out.empty()) write_file(out, text);
    std::cout << text;
    return 0;
  }
};

}  // namespace

int run_cli(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Decentralized packet routing with learned communication"};
  app.require_subcommand(1);
  GenGraphs gen;
  TrainSpr train_spr_cmd;
  EvalSpr eval_spr_cmd;
  TrainRoute train_route;
  EvalRoute eval_route;
  Compare compare;
  CLI::App* c_gen = app.add_subcommand("gen-graphs", "Generate graphs and their statistics");
  CLI::App* c_tspr = app.add_subcommand("train-spr", "Train on shortest path regression");
  CLI::App* c_espr = app.add_subcommand("eval-spr", "MSE table across sequence lengths");
  CLI::App* c_troute = app.add_subcommand("train-route", "Train the routing agent");
  CLI::App* c_eroute = app.add_subcommand("eval-route", "Evaluate a routing policy");
  CLI::App* c_cmp = app.add_subcommand("compare", "Percentage deltas between eval-route runs");
  gen.attach(c_gen);
  train_spr_cmd.attach(c_tspr);
  eval_spr_cmd.attach(c_espr);
  train_route.attach(c_troute);
  eval_route.attach(c_eroute);
  compare.attach(c_cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (c_gen->parsed()) return gen.run();
    if (c_tspr->parsed()) return train_spr_cmd.run();
    if (c_espr->parsed()) return eval_spr_cmd.run();
    if (c_troute->parsed()) return train_route.run();
    if (c_eroute->parsed()) return eval_route.run();
    if (c_cmp->parsed()) return compare.run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace dyncomm::tools
