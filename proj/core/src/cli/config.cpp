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

#include "dyncomm/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dyncomm {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["graph"] = {{"nodes", c.nodes},
                {"degree", c.degree},
                {"delay_scale", c.graphgen.delay_scale},
                {"max_attempts", c.graphgen.max_attempts}};
  const EnvConfig& e = c.env;
  j["env"] = {{"n_packets", e.n_packets},
              {"failure_prob", e.failure_prob},
              {"failure_min", e.failure_min},
              {"failure_max", e.failure_max},
              {"max_inactive_frac", e.max_inactive_frac},
              {"bandwidth", e.bandwidth},
              {"reward_deliver", e.reward_deliver},
              {"reward_blocked", e.reward_blocked},
              {"reward_inactive", e.reward_inactive},
              {"episode_steps", c.rl.episode_steps}};
  const NodeModelConfig& n = c.node;
  j["model"] = {{"hidden", n.hidden},
                {"encoder", n.encoder},
                {"rounds", n.rounds},
                {"aggregation", to_string(n.agg)},
                {"communication", to_string(n.comm)},
                {"heads", n.controller.heads},
                {"comm_bias", n.controller.comm_bias},
                {"noise_scale", n.controller.noise_scale},
                {"matched_p", n.matched_p},
                {"gat_exclude_self", n.gat_exclude_self},
                {"q_encoder", c.rl.q_encoder},
                {"mlp_slope", n.mlp_slope},
                {"gat_slope", n.gat_slope}};
  const RlConfig& r = c.rl;
  j["dqn"] = {{"lr", r.adamw.lr},
              {"weight_decay", r.adamw.weight_decay},
              {"batch", r.batch},
              {"seq_len", r.seq_len},
              {"gamma", r.gamma},
              {"tau", r.tau},
              {"clip", r.clip},
              {"replay_capacity", r.replay_capacity},
              {"total_steps", r.total_steps},
              {"train_every", r.train_every},
              {"log_every", r.log_every},
              {"checkpoint_every", r.checkpoint_every},
              {"epsilon",
               {{"initial", r.epsilon.initial},
                {"minimum", r.epsilon.minimum},
                {"decay", r.epsilon.decay},
                {"decay_every", r.epsilon.decay_every},
                {"warmup", r.epsilon.warmup}}}};
  const SprSection& s = c.spr;
  j["spr"] = {{"train", s.train},
              {"val", s.val},
              {"test", s.test},
              {"rounds", s.rounds},
              {"iterations", s.iterations},
              {"validate_every", s.validate_every},
              {"batch", s.batch},
              {"seq_len", s.seq_len},
              {"val_batch", s.val_batch},
              {"lr", s.lr},
              {"weight_decay", s.weight_decay},
              {"clip", s.clip},
              {"stop_on_spike", s.stop_on_spike},
              {"spike_factor", s.spike_factor},
              {"seq_lens", s.seq_lens}};
  j["eval"] = {{"graphs", c.eval.graphs},
               {"horizon", c.eval.horizon},
               {"seeds", c.eval.seeds},
               {"policy", c.eval.policy}};
  return j;
}

namespace {

const char* type_name(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

// Does v fit where the default holds d?
bool same_kind(const json& d, const json& v) {
  if (d.is_number_unsigned()) return v.is_number_unsigned();
  if (d.is_number_integer()) return v.is_number_integer();
  if (d.is_number_float()) return v.is_number();
  return std::string(type_name(d)) == type_name(v);
}

void check_keys(const json& user, const json& defaults, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError(key + ": unknown key");
    const json& d = defaults.at(it.key());
    const json& v = it.value();
    if (d.is_object()) {
      if (!v.is_object()) throw ConfigError(key + ": expected object, got " + type_name(v));
      check_keys(v, d, key);
    } else if (d.is_array()) {
      if (!v.is_array()) throw ConfigError(key + ": expected array, got " + type_name(v));
      // Empty defaults hold real numbers (matched_p).
      const json proto = d.empty() ? json(0.5) : d.front();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!same_kind(proto, v[i])) {
          throw ConfigError(key + "[" + std::to_string(i) + "]: expected " + type_name(proto) +
                            ", got " + type_name(v[i]));
        }
      }
    } else if (!same_kind(d, v)) {
      const char* want = d.is_number_unsigned() ? "non-negative integer" : type_name(d);
      throw ConfigError(key + ": expected " + want + ", got " + type_name(v));
    }
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.nodes >= 3, "graph.nodes", "must be >= 3");
  require(c.degree >= 1 && c.degree < c.nodes, "graph.degree", "must be in [1, nodes)");
  require((c.nodes * c.degree) % 2 == 0, "graph.degree", "nodes * degree must be even");
  require(c.graphgen.delay_scale > 0, "graph.delay_scale", "must be > 0");
  require(c.graphgen.max_attempts >= 1, "graph.max_attempts", "must be >= 1");
  const EnvConfig& e = c.env;
  require(e.n_packets >= 1, "env.n_packets", "must be >= 1");
  require(e.failure_prob >= 0 && e.failure_prob <= 1, "env.failure_prob", "must be in [0, 1]");
  require(e.failure_min >= 1, "env.failure_min", "must be >= 1");
  require(e.failure_max >= e.failure_min, "env.failure_max", "must be >= failure_min");
  require(e.max_inactive_frac >= 0 && e.max_inactive_frac < 1, "env.max_inactive_frac",
          "must be in [0, 1)");
  require(e.bandwidth >= 1, "env.bandwidth", "must be >= 1");
  require(c.rl.episode_steps >= c.rl.seq_len, "env.episode_steps", "must be >= dqn.seq_len");
  const NodeModelConfig& n = c.node;
  require(n.hidden >= 1, "model.hidden", "must be >= 1");
  require(!n.encoder.empty(), "model.encoder", "must not be empty");
  for (int w : n.encoder) require(w >= 1, "model.encoder", "widths must be >= 1");
  for (int w : c.rl.q_encoder) require(w >= 1, "model.q_encoder", "widths must be >= 1");
  require(n.rounds >= 1, "model.rounds", "must be >= 1");
  require(n.controller.heads >= 1 && n.hidden % n.controller.heads == 0, "model.heads",
          "must divide model.hidden");
  require(n.controller.noise_scale >= 0, "model.noise_scale", "must be >= 0");
  require(n.matched_p.size() <= 1 || static_cast<int>(n.matched_p.size()) == n.rounds ||
              static_cast<int>(n.matched_p.size()) == c.spr.rounds,
          "model.matched_p", "needs 0, 1 or one value per round");
  for (double p : n.matched_p) require(p >= 0 && p <= 1, "model.matched_p", "values must be in [0, 1]");
  require(n.mlp_slope >= 0, "model.mlp_slope", "must be >= 0");
  require(n.gat_slope >= 0, "model.gat_slope", "must be >= 0");
  const RlConfig& r = c.rl;
  require(r.adamw.lr > 0, "dqn.lr", "must be > 0");
  require(r.adamw.weight_decay >= 0, "dqn.weight_decay", "must be >= 0");
  require(r.batch >= 1, "dqn.batch", "must be >= 1");
  require(r.seq_len >= 1, "dqn.seq_len", "must be >= 1");
  require(r.gamma >= 0 && r.gamma <= 1, "dqn.gamma", "must be in [0, 1]");
  require(r.tau > 0 && r.tau <= 1, "dqn.tau", "must be in (0, 1]");
  require(r.replay_capacity >= 1, "dqn.replay_capacity", "must be >= 1");
  require(r.total_steps >= 1, "dqn.total_steps", "must be >= 1");
  require(r.train_every >= 1, "dqn.train_every", "must be >= 1");
  require(r.log_every >= 1, "dqn.log_every", "must be >= 1");
  require(r.checkpoint_every >= 0, "dqn.checkpoint_every", "must be >= 0");
  const EpsilonSchedule& eps = r.epsilon;
  require(eps.initial >= 0 && eps.initial <= 1, "dqn.epsilon.initial", "must be in [0, 1]");
  require(eps.minimum >= 0 && eps.minimum <= eps.initial, "dqn.epsilon.minimum",
          "must be in [0, initial]");
  require(eps.decay > 0 && eps.decay <= 1, "dqn.epsilon.decay", "must be in (0, 1]");
  require(eps.decay_every >= 1, "dqn.epsilon.decay_every", "must be >= 1");
  require(eps.warmup >= 0, "dqn.epsilon.warmup", "must be >= 0");
  const SprSection& s = c.spr;
  require(s.train >= 1, "spr.train", "must be >= 1");
  require(s.val >= 1, "spr.val", "must be >= 1");
  require(s.test >= 0, "spr.test", "must be >= 0");
  require(s.rounds >= 1, "spr.rounds", "must be >= 1");
  require(s.iterations >= 0, "spr.iterations", "must be >= 0");
  require(s.validate_every >= 1, "spr.validate_every", "must be >= 1");
  require(s.batch >= 1, "spr.batch", "must be >= 1");
  require(s.seq_len >= 1, "spr.seq_len", "must be >= 1");
  require(s.val_batch >= 1, "spr.val_batch", "must be >= 1");
  require(s.lr > 0, "spr.lr", "must be > 0");
  require(s.weight_decay >= 0, "spr.weight_decay", "must be >= 0");
  require(s.spike_factor > 1, "spr.spike_factor", "must be > 1");
  require(!s.seq_lens.empty(), "spr.seq_lens", "must not be empty");
  for (int l : s.seq_lens) require(l >= 1, "spr.seq_lens", "values must be >= 1");
  require(c.eval.graphs >= 1, "eval.graphs", "must be >= 1");
  require(c.eval.horizon >= 1, "eval.horizon", "must be >= 1");
  require(!c.eval.seeds.empty(), "eval.seeds", "must not be empty");
  try {
    parse_policy(c.eval.policy);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("eval.policy: ") + ex.what());
  }
}

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("<root>: expected object");
  const json defaults = config_to_json(ExperimentConfig{});
  check_keys(user, defaults, "");
  json j = defaults;
  j.merge_patch(user);

  ExperimentConfig c;
  c.seed = j["seed"].get<std::uint64_t>();
  c.nodes = j["graph"]["nodes"];
  c.degree = j["graph"]["degree"];
  c.graphgen.delay_scale = j["graph"]["delay_scale"];
  c.graphgen.max_attempts = j["graph"]["max_attempts"];
  const json& e = j["env"];
  c.env.n_packets = e["n_packets"];
  c.env.failure_prob = e["failure_prob"];
  c.env.failure_min = e["failure_min"];
  c.env.failure_max = e["failure_max"];
  c.env.max_inactive_frac = e["max_inactive_frac"];
  c.env.bandwidth = e["bandwidth"];
  c.env.reward_deliver = e["reward_deliver"];
  c.env.reward_blocked = e["reward_blocked"];
  c.env.reward_inactive = e["reward_inactive"];
  c.rl.episode_steps = e["episode_steps"];
  const json& m = j["model"];
  c.node.hidden = m["hidden"];
  c.node.encoder = m["encoder"].get<std::vector<int>>();
  c.node.rounds = m["rounds"];
  try {
    c.node.agg = parse_aggregation(m["aggregation"].get<std::string>());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("model.aggregation: ") + ex.what());
  }
  try {
    c.node.comm = parse_comm_mode(m["communication"].get<std::string>());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("model.communication: ") + ex.what());
  }
  c.node.controller.heads = m["heads"];
  c.node.controller.comm_bias = m["comm_bias"];
  c.node.controller.noise_scale = m["noise_scale"];
  c.node.controller.hidden = c.node.hidden;
  c.node.matched_p = m["matched_p"].get<std::vector<double>>();
  c.node.gat_exclude_self = m["gat_exclude_self"];
  c.rl.q_encoder = m["q_encoder"].get<std::vector<int>>();
  c.node.mlp_slope = m["mlp_slope"];
  c.node.gat_slope = m["gat_slope"];
  const json& d = j["dqn"];
  c.rl.adamw.lr = d["lr"];
  c.rl.adamw.weight_decay = d["weight_decay"];
  c.rl.batch = d["batch"];
  c.rl.seq_len = d["seq_len"];
  c.rl.gamma = d["gamma"];
  c.rl.tau = d["tau"];
  c.rl.clip = d["clip"];
  c.rl.replay_capacity = d["replay_capacity"].get<std::size_t>();
  c.rl.total_steps = d["total_steps"];
  c.rl.train_every = d["train_every"];
  c.rl.log_every = d["log_every"];
  c.rl.checkpoint_every = d["checkpoint_every"];
  const json& eps = d["epsilon"];
  c.rl.epsilon.initial = eps["initial"];
  c.rl.epsilon.minimum = eps["minimum"];
  c.rl.epsilon.decay = eps["decay"];
  c.rl.epsilon.decay_every = eps["decay_every"];
  c.rl.epsilon.warmup = eps["warmup"];
  const json& s = j["spr"];
  c.spr.train = s["train"];
  c.spr.val = s["val"];
  c.spr.test = s["test"];
  c.spr.rounds = s["rounds"];
  c.spr.iterations = s["iterations"];
  c.spr.validate_every = s["validate_every"];
  c.spr.batch = s["batch"];
  c.spr.seq_len = s["seq_len"];
  c.spr.val_batch = s["val_batch"];
  c.spr.lr = s["lr"];
  c.spr.weight_decay = s["weight_decay"];
  c.spr.clip = s["clip"];
  c.spr.stop_on_spike = s["stop_on_spike"];
  c.spr.spike_factor = s["spike_factor"];
  c.spr.seq_lens = s["seq_lens"].get<std::vector<int>>();
  const json& ev = j["eval"];
  c.eval.graphs = ev["graphs"];
  c.eval.horizon = ev["horizon"];
  c.eval.seeds = ev["seeds"].get<std::vector<std::uint64_t>>();
  c.eval.policy = ev["policy"];
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("<parse>: ") + ex.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

namespace {

NodeModelConfig derived_node(const ExperimentConfig& c, int rounds) {
  NodeModelConfig n = c.node;
  n.obs_width = node_obs_width(c.nodes, c.degree);
  n.controller.hidden = n.hidden;
  n.rounds = rounds;
  return n;
}

}  // namespace

RlConfig make_rl_config(const ExperimentConfig& c) {
  RlConfig r = c.rl;
  r.nodes = c.nodes;
  r.degree = c.degree;
  r.graphgen = c.graphgen;
  r.env = c.env;
  r.node = derived_node(c, c.node.rounds);
  return r;
}

NodeModelConfig make_spr_node_config(const ExperimentConfig& c) {
  return derived_node(c, c.spr.rounds);
}

SprDataConfig make_spr_data_config(const ExperimentConfig& c) {
  SprDataConfig d;
  d.nodes = c.nodes;
  d.degree = c.degree;
  d.graphgen = c.graphgen;
  d.env = c.env;
  d.train = c.spr.train;
  d.val = c.spr.val;
  d.test = c.spr.test;
  return d;
}

SprTrainConfig make_spr_train_config(const ExperimentConfig& c) {
  SprTrainConfig t;
  t.seq_len = c.spr.seq_len;
  t.batch = c.spr.batch;
  t.iterations = c.spr.iterations;
  t.validate_every = c.spr.validate_every;
  t.val_batch = c.spr.val_batch;
  t.adamw.lr = c.spr.lr;
  t.adamw.weight_decay = c.spr.weight_decay;
  t.clip = c.spr.clip;
  t.stop_on_spike = c.spr.stop_on_spike;
  t.spike_factor = c.spr.spike_factor;
  return t;
}

EvalConfig make_eval_config(const ExperimentConfig& c) {
  EvalConfig e;
  e.env = c.env;
  e.horizon = c.eval.horizon;
  return e;
}

}  // namespace dyncomm
