// Copyright 2026 The MAAS Graph Authors
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

// maas: generate synthetic scenes, train, evaluate, ablate and inspect graphs.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "maas/checkpoint.hpp"
#include "maas/config.hpp"
#include "maas/errors.hpp"
#include "maas/trainer.hpp"
#include "maas/windows.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace maas {
namespace {

struct Options {
  std::string config_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  // inspect-graph
  std::string data;
  int scene = 0;
  int window = 0;
  int group = 0;
  int layer = 1;
  std::string checkpoint;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed for " + path.string());
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

// One invocation: the resolved configuration plus the files it read and wrote.
class Run {
 public:
  Run(std::string command, const Options& opts)
      : command_(std::move(command)),
        config_(resolve_run_config(opts.config_path.empty()
                                       ? std::nullopt
                                       : std::optional<std::string>(read_file(opts.config_path)),
                                   opts.overrides, opts.seed)),
        out_(opts.out) {}

  const RunConfig& config() const { return config_; }

  fs::path path(const std::string& p) const {
    const fs::path f(p);
    return f.is_absolute() ? f : out_ / f;
  }

  fs::path output(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    written_.push_back(file);
    return file;
  }

  fs::path output(const char* name) { return output(out_ / name); }

  void input(const fs::path& file) { read_.push_back(file); }

  void write_manifest() {
    fs::create_directories(out_);
    auto hashes = [&](const std::vector<fs::path>& files) {
      ordered_json j = ordered_json::object();
      for (const auto& f : files) j[label(f)] = sha256_file(f);
      return j;
    };
    ordered_json m;
    m["command"] = command_;
    m["seed"] = config_.train.seed;
    m["config"] = ordered_json::parse(run_config_to_json(config_));
    m["inputs"] = hashes(read_);
    m["artifacts"] = hashes(written_);
    write_file(out_ / ("manifest." + command_ + ".json"), m.dump(2) + "\n");
  }

 private:
  std::string label(const fs::path& f) const {
    const auto rel = f.lexically_relative(out_);
    return rel.empty() || *rel.begin() == ".." ? f.string() : rel.string();
  }

  std::string command_;
  RunConfig config_;
  fs::path out_;
  std::vector<fs::path> written_;
  std::vector<fs::path> read_;
};

std::vector<SceneSample> load_scenes(Run& run, const fs::path& file) {
  auto ds = read_dataset(file.string());
  run.input(file);
  return std::move(ds.scenes);
}

void cmd_gen(Run& run) {
  const auto& c = run.config();
  const auto test_cfg = test_synth_config(c);
  test_cfg.validate();
  const auto train_set = generate(c.synth);
  const auto test_set = generate(test_cfg);
  const auto train_path = run.output(run.path(c.paths.train_data));
  const auto test_path = run.output(run.path(c.paths.test_data));
  write_dataset(train_path.string(), train_set, c.synth);
  write_dataset(test_path.string(), test_set, test_cfg);
  std::cout << "wrote " << train_set.size() << " scenes to " << train_path.string() << "\n"
            << "wrote " << test_set.size() << " scenes to " << test_path.string() << "\n";
}

void cmd_train(Run& run) {
  const auto& c = run.config();
  const auto scenes = load_scenes(run, run.path(c.paths.train_data));
  std::ostringstream log;
  log << "step,epoch,loss\n";
  const auto result = train(c.model, c.train, scenes, [&](int epoch, int step, double loss) {
    log << step << ',' << epoch << ',' << loss << '\n';
  });
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e << " mean loss " << result.epoch_loss[e] << "\n";
  }
  const auto ckpt = run.output(run.path(c.paths.checkpoint));
  ad::save_checkpoint(ckpt.string(), result.params, checkpoint_metadata(c.model, c.train.window));
  write_file(run.output("loss.csv"), log.str());
  std::cout << "checkpoint " << ckpt.string() << " after " << result.steps << " steps\n";
}

void cmd_eval(Run& run) {
  const auto& c = run.config();
  const auto ckpt_path = run.path(c.paths.checkpoint);
  auto ckpt = ad::load_checkpoint(ckpt_path.string());
  run.input(ckpt_path);
  const auto scenes = load_scenes(run, run.path(c.paths.test_data));
  const auto result = evaluate(ckpt, scenes, c.eval_batch_scenes);
  const auto [model, window] = parse_checkpoint_metadata(ckpt.metadata);
  nlohmann::ordered_json cfg;
  cfg["model"] = nlohmann::ordered_json::parse(model_config_to_json(model));
  cfg["window"] = {{"num_lans", window.num_lans},
                   {"max_video_nodes", window.max_video_nodes},
                   {"self_loops_only", window.self_loops_only}};
  write_file(run.output("metrics.json"), report_to_json(result.report, cfg.dump(), c.train.seed) + "\n");
  const std::string text = report_to_text(result.report);
  write_file(run.output("metrics.txt"), text);
  std::ofstream csv(run.output("predictions.csv"));
  write_predictions_csv(csv, result.records);
  if (!csv) throw IoError("cannot write predictions.csv");
  std::cout << text;
}

void cmd_ablate(Run& run) {
  const auto& c = run.config();
  const auto train_set = load_scenes(run, run.path(c.paths.train_data));
  const auto test_set = load_scenes(run, run.path(c.paths.test_data));
  const auto rows = ablation_grid(c.ablate, c.model, c.train, train_set, test_set);
  const std::string table = ablation_table(rows);
  write_file(run.output("ablation.txt"), table);
  write_file(run.output("ablation.json"), ablation_json(rows) + "\n");
  std::cout << table;
}

void cmd_inspect(Run& run, const Options& opts) {
  const auto& c = run.config();
  const auto data = run.path(opts.data.empty() ? c.paths.train_data : opts.data);
  const auto scenes = load_scenes(run, data);
  const auto it = std::find_if(scenes.begin(), scenes.end(),
                               [&](const SceneSample& s) { return s.scene_id == opts.scene; });
  if (it == scenes.end()) {
    throw ConfigError("scene " + std::to_string(opts.scene) + " not found in " + data.string());
  }
  std::optional<ad::Checkpoint> ckpt;
  WindowConfig window = c.train.window;
  if (!opts.checkpoint.empty()) {
    ckpt = ad::load_checkpoint(run.path(opts.checkpoint).string());
    run.input(run.path(opts.checkpoint));
    window = parse_checkpoint_metadata(ckpt->metadata).second;
  }
  const auto windows = make_windows(*it, window, GroupingMode::InferSplit);
  const auto w = std::find_if(windows.begin(), windows.end(), [&](const WindowGraph& g) {
    return g.window_index == opts.window && g.group_index == opts.group;
  });
  if (w == windows.end()) {
    throw ConfigError("scene " + std::to_string(opts.scene) + " has no window " +
                      std::to_string(opts.window) + " group " + std::to_string(opts.group));
  }
  std::vector<Edge> dynamic;
  if (ckpt) {
    const auto model_cfg = parse_checkpoint_metadata(ckpt->metadata).first;
    if (model_cfg.streams == Streams::StaticOnly) throw ConfigError("checkpoint has no dynamic stream");
    if (opts.layer < 1 || opts.layer > model_cfg.num_layers) {
      throw ConfigError("--layer must lie in [1, " + std::to_string(model_cfg.num_layers) + "]");
    }
    MaasModel<float> model(model_cfg);
    const auto batch = make_batch(std::span<const AssignationGraph>(&w->graph, 1),
                                  model_cfg.supervise_audio, window.self_loops_only);
    ForwardTrace trace;
    model.predict(ckpt->params, batch, &trace);
    dynamic = trace.dynamic_edges[static_cast<std::size_t>(opts.layer - 1)];
  }
  std::ostringstream dot;
  write_dot(dot, w->graph, dynamic,
            "scene" + std::to_string(opts.scene) + "_window" + std::to_string(opts.window));
  const auto file = run.output("graph.dot");
  write_file(file, dot.str());
  std::size_t loops = 0;
  for (const auto& e : w->graph.edges) loops += e.src == e.dst;
  std::cout << "nodes " << w->graph.nodes.size() << ", static edges "
            << w->graph.edges.size() - loops << " + " << loops << " self-loops";
  if (ckpt) std::cout << ", dynamic edges (layer " << opts.layer << ") " << dynamic.size();
  std::cout << "\nwrote " << file.string() << "\n";
}

void print_error(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
}

}  // namespace
}  // namespace maas

int main(int argc, char** argv) {
  using namespace maas;
  CLI::App app{"Multi-modal active speaker assignation on synthetic scenes"};
  app.require_subcommand(1);
  Options opts;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opts.seed, "Seed for generation and training");
    sub->add_option("--set", opts.overrides, "Override a config key, e.g. train.epochs=2")
        ->allow_extra_args(false);
  };
  auto* gen = app.add_subcommand("gen", "Generate training and test scenes");
  auto* trn = app.add_subcommand("train", "Train a model and write a checkpoint");
  auto* evl = app.add_subcommand("eval", "Score the test scenes with a checkpoint");
  auto* abl = app.add_subcommand("ablate", "Train and evaluate an ablation grid");
  auto* ins = app.add_subcommand("inspect-graph", "Write one window graph as DOT");
  for (auto* sub : {gen, trn, evl, abl, ins}) common(sub);
  ins->add_option("--data", opts.data, "Dataset to read (default: paths.train_data)");
  ins->add_option("--scene", opts.scene, "Scene id")->capture_default_str();
  ins->add_option("--window", opts.window, "Window index within the scene")->capture_default_str();
  ins->add_option("--group", opts.group, "Speaker group within the window")->capture_default_str();
  ins->add_option("--layer", opts.layer, "Layer whose dynamic edges to draw (1-based)")
      ->capture_default_str();
  ins->add_option("--checkpoint", opts.checkpoint, "Checkpoint for the dynamic edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what());
    return 1;
  }

  try {
    auto* sub = app.get_subcommands().front();
    Run run(sub->get_name(), opts);
    if (sub == gen) cmd_gen(run);
    if (sub == trn) cmd_train(run);
    if (sub == evl) cmd_eval(run);
    if (sub == abl) cmd_ablate(run);
    if (sub == ins) cmd_inspect(run, opts);
    run.write_manifest();
  } catch (const NumericsError& e) {
    print_error(e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 3;
  }
  return 0;
}
