// Copyright 2026 The spseg Authors
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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spseg/common/error.hpp"
#include "spseg/model/checkpoint.hpp"
#include "spseg/pipeline/config.hpp"
#include "spseg/pipeline/dataset.hpp"
#include "spseg/pipeline/evaluate.hpp"
#include "spseg/pipeline/sweep.hpp"
#include "spseg/pipeline/train.hpp"

namespace fs = std::filesystem;
using namespace spseg;
using namespace spseg::pipeline;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

std::vector<double> parse_triple(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--room expects W,D,H");
    }
  }
  if (out.size() != 3) throw ConfigError("--room expects W,D,H");
  return out;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spseg: joint instance and semantic point cloud segmentation"};
  app.require_subcommand(1);

  // gendata
  auto* gen = app.add_subcommand("gendata", "generate a synthetic dataset");
  std::string gen_out, gen_mode = "scene", gen_room;
  std::size_t gen_scenes = 8;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--scenes", gen_scenes, "number of scenes");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--mode", gen_mode, "scene or shape")->check(CLI::IsMember({"scene", "shape"}));
  gen->add_option("--room", gen_room, "room size W,D,H in meters (scene mode)");

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  std::string tr_config, tr_data, tr_out, tr_log;
  bool tr_no_sp = false;
  tr->add_option("--config", tr_config, "config file")->required();
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr->add_option("--log", tr_log, "train log path (default <out>.log.tsv)");
  tr->add_flag("--no-selfpred", tr_no_sp, "train without the self-prediction objective");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_ckpt, ev_data, ev_config, ev_report, ev_split = "val";
  bool ev_oracle = false;
  ev->add_option("--ckpt", ev_ckpt, "checkpoint path");
  ev->add_option("--data", ev_data, "dataset directory")->required();
  ev->add_option("--config", ev_config, "config file for inference settings");
  ev->add_option("--report", ev_report, "report path (default stdout)");
  ev->add_option("--split", ev_split, "train or val")->check(CLI::IsMember({"train", "val"}));
  ev->add_flag("--oracle", ev_oracle, "score ground truth against itself");

  // predict
  auto* pr = app.add_subcommand("predict", "predict one scene");
  std::string pr_ckpt, pr_input, pr_output, pr_config;
  pr->add_option("--ckpt", pr_ckpt, "checkpoint path")->required();
  pr->add_option("--input", pr_input, "ptsseg input")->required();
  pr->add_option("--output", pr_output, "prediction output")->required();
  pr->add_option("--config", pr_config, "config file for inference settings");

  // sweep
  auto* sw = app.add_subcommand("sweep", "train and evaluate over one parameter");
  std::string sw_param, sw_values, sw_config, sw_data, sw_out = "sweep.tsv";
  std::size_t sw_seeds = 1;
  sw->add_option("--param", sw_param, "beta, alpha or groups")->required();
  sw->add_option("--values", sw_values, "comma separated values")->required();
  sw->add_option("--config", sw_config, "config file")->required();
  sw->add_option("--data", sw_data, "dataset directory")->required();
  sw->add_option("--out", sw_out, "table path; the series goes to <out>.series.tsv");
  sw->add_option("--seeds", sw_seeds, "seeds per value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      data::SceneSpec spec;
      spec.mode = gen_mode == "shape" ? data::Mode::shape : data::Mode::scene;
      if (!gen_room.empty()) {
        const auto r = parse_triple(gen_room);
        spec.room = {r[0], r[1], r[2]};
      }
      if (gen_scenes == 0) std::cerr << "warning: --scenes 0 writes a manifest only\n";
      const Manifest m = generate_dataset(gen_out, gen_scenes, gen_seed, spec);
      std::cout << "wrote " << m.train.size() << " train and " << m.val.size()
                << " val scenes to " << gen_out << "\n";
    } else if (*tr) {
      const RunConfig cfg = load_config(tr_config);
      const Dataset data = load_dataset(tr_data);
      TrainOptions opts;
      opts.selfpred = !tr_no_sp;
      const auto t0 = std::chrono::steady_clock::now();
      opts.on_epoch = [&](const EpochLog& e) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "epoch " << e.epoch << " total " << e.total << " l_ins " << e.l_ins
                  << " l_sem " << e.l_sem << " l_sp " << e.l_sp;
        if (e.validated) std::cerr << " val_mIoU " << e.val.miou << " val_mWCov " << e.val.mwcov;
        std::cerr << " (" << secs << " s)\n";
      };
      const TrainResult r = train(cfg, data, opts);
      model::save_checkpoint(r.params, fs::path(tr_out));
      auto log = open_out(tr_log.empty() ? tr_out + ".log.tsv" : tr_log);
      write_train_log(log, r.log);
    } else if (*ev) {
      const Dataset data = load_dataset(ev_data);
      const auto& scenes = ev_split == "val" ? data.val : data.train;
      Evaluation result;
      if (ev_oracle) {
        result = evaluate_oracle(scenes, data.num_classes());
      } else {
        if (ev_ckpt.empty()) throw ConfigError("eval needs --ckpt unless --oracle is given");
        RunConfig cfg = config_or_default(ev_config);
        cfg.mode = data.manifest.mode;
        const model::ModelParams params = model::load_checkpoint(fs::path(ev_ckpt));
        if (params.arch().num_classes != data.num_classes()) {
          throw DataError("checkpoint class count differs from the dataset");
        }
        result = evaluate(params, cfg, scenes);
      }
      if (ev_report.empty()) {
        write_evaluation(std::cout, result, data.manifest.class_names);
      } else {
        auto out = open_out(ev_report);
        write_evaluation(out, result, data.manifest.class_names);
      }
    } else if (*pr) {
      RunConfig cfg = config_or_default(pr_config);
      const model::ModelParams params = model::load_checkpoint(fs::path(pr_ckpt));
      const data::Scene scene = data::read_ptsseg(fs::path(pr_input));
      cfg.mode = params.arch().input_width == data::input_width(data::Mode::shape) ? "shape" : "scene";
      if (scene.num_classes != params.arch().num_classes) {
        throw DataError("input class count differs from the checkpoint");
      }
      const ScenePrediction p = predict_scene(params, cfg, scene);
      data::write_predictions(fs::path(pr_output), scene.coords(), p.sem, p.ins);
    } else if (*sw) {
      if (!is_sweepable(sw_param)) {
        throw ConfigError("'" + sw_param + "' is not sweepable (use beta, alpha or groups)");
      }
      const RunConfig cfg = load_config(sw_config);
      const Dataset data = load_dataset(sw_data);
      const SweepTable t = sweep(cfg, data, sw_param, split_values(sw_values), sw_seeds);
      auto table = open_out(sw_out);
      write_sweep_table(table, t);
      auto series = open_out(sw_out + ".series.tsv");
      write_sweep_series(series, t);
      write_sweep_table(std::cout, t);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
