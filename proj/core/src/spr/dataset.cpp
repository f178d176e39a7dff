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
#include "dyncomm/spr/dataset.hpp"

#include "dyncomm/graph/graph_io.hpp"
#include "dyncomm/graph/stats.hpp"

namespace dyncomm {

SprSample make_spr_sample(const Geo2DGraph& g, const EnvConfig& env, Rng& env_rng) {
  RoutingEnv e(env);
  e.reset(g, env_rng);
  SprSample s;
  s.graph = g;
  s.obs = e.node_observations();
  s.labels = apsp(g, Metric::kDelay).cast<double>();
  return s;
}

SprDataset build_dataset(const SprDataConfig& cfg, std::uint64_t seed) {
  Rng graph_rng = Rng::stream(seed, "graphgen");
  Rng env_rng = Rng::stream(seed, "env");
  SprDataset ds;
  auto fill = [&](std::vector<SprSample>& out, int n) {
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      out.push_back(make_spr_sample(generate_graph(cfg.nodes, cfg.degree, graph_rng, cfg.graphgen),
                                    cfg.env, env_rng));
    }
  };
  fill(ds.train, cfg.train);
  fill(ds.val, cfg.val);
  fill(ds.test, cfg.test);
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const SprDataset& ds) {
  auto dump = [](const std::filesystem::path& d, const std::vector<SprSample>& xs) {
    std::vector<Geo2DGraph> gs;
    gs.reserve(xs.size());
    for (const auto& s : xs) gs.push_back(s.graph);
    save_graph_dir(d, gs, true);
  };
  dump(dir / "train", ds.train);
  dump(dir / "val", ds.val);
  dump(dir / "test", ds.test);
}

}  // namespace dyncomm
