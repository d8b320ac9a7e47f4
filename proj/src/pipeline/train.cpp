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

#include "spseg/pipeline/train.hpp"

#include <cmath>
#include <cstdio>

#include "spseg/common/error.hpp"
#include "spseg/common/rng.hpp"
#include "spseg/gradcore/ops.hpp"
#include "spseg/losses/losses.hpp"
#include "spseg/selfpred/selfpred.hpp"

namespace spseg::pipeline {
namespace {

// Independent stream per (purpose, epoch, position); nothing depends on the
// order in which other streams were consumed.
Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t epoch, std::uint64_t pos) {
  return Rng(seed).fork((purpose << 56) ^ (epoch << 28) ^ pos);
}

struct Item {
  std::size_t scene;
  std::size_t block;
};

struct SampleResult {
  std::vector<Matrix> grads;  // creation order
  double l_ins = 0.0, l_sem = 0.0, l_sp = 0.0, total = 0.0;
  bool sp_skipped = false;
};

SampleResult run_sample(const model::ModelParams& params, const RunConfig& cfg,
                        const data::Sample& s, bool use_sp, Rng& sp_rng) {
  const std::size_t classes = params.arch().num_classes;
  const Matrix y_sem = selfpred::one_hot(s.sem, classes);
  SampleResult r;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const bool sp = use_sp && attempt == 0;
    Tape tape;
    model::BoundModel m(tape, params, true);
    const model::FeatureBundle fb = model::forward(m, tape.constant(s.features), sp);
    const losses::InstanceLoss il = losses::instance_loss(fb.f_ins, s.ins, cfg.instance_params());
    const Var l_sem = losses::semantic_loss(fb.sem_logits, y_sem);
    Var l_sp;
    if (sp) {
      try {
        l_sp = selfpred::self_prediction_loss(fb.f_joint, s.sem, s.ins, classes, cfg.selfpred(),
                                              sp_rng);
      } catch (const DegenerateGraphError&) {
        r.sp_skipped = true;
        continue;
      } catch (const SingularMatrixError&) {
        r.sp_skipped = true;
        continue;
      }
    } else {
      l_sp = tape.constant(Matrix(1, 1));
    }
    const Var total = losses::total_loss(il.l_ins, l_sem, l_sp, sp ? cfg.beta : 0.0);
    const Gradients g = tape.backward(total);
    r.grads.reserve(m.vars().size());
    for (Var v : m.vars()) r.grads.push_back(g[v]);
    r.l_ins = il.l_ins.scalar();
    r.l_sem = l_sem.scalar();
    r.l_sp = l_sp.scalar();
    r.total = total.scalar();
    return r;
  }
  return r;
}

}  // namespace

double learning_rate(const RunConfig& cfg, std::size_t epoch) {
  return cfg.lr * std::ldexp(1.0, -static_cast<int>(epoch / cfg.lr_halve_every));
}

TrainResult train(const RunConfig& cfg, const Dataset& data, const TrainOptions& opts) {
  cfg.validate();
  if (data.manifest.mode != cfg.mode) throw ConfigError("config mode differs from the dataset mode");
  if (data.train.empty()) throw DataError("dataset has no training scenes");
  const data::Mode mode = cfg.data_mode();
  const model::Architecture arch = cfg.architecture(data::input_width(mode), data.num_classes());
  arch.validate();

  std::vector<std::vector<data::Block>> blocks;
  std::vector<Item> items;
  for (std::size_t s = 0; s < data.train.size(); ++s) {
    blocks.push_back(data::split_blocks(data.train[s], cfg.block_size));
    for (std::size_t b = 0; b < blocks.back().size(); ++b) items.push_back({s, b});
  }

  // Baseline and beta = 0 skip the self-prediction branch entirely: its
  // gradient would be exactly zero and the joint layer stays at initialization.
  const bool use_sp = opts.selfpred && cfg.beta > 0.0;

  TrainResult out;
  out.params = model::init_params(cfg.seed, arch);
  auto& entries = out.params.entries();
  std::vector<Matrix> velocity;
  for (const auto& e : entries) velocity.emplace_back(e.second.rows(), e.second.cols());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    std::vector<Item> order = items;
    Rng shuffle_rng = stream(cfg.seed, 1, epoch, 0);
    shuffle_rng.shuffle(std::span<Item>(order));

    EpochLog log;
    log.epoch = epoch + 1;
    log.lr = lr;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      std::vector<Matrix> sum;
      for (std::size_t p = start; p < stop; ++p) {
        const Item it = order[p];
        Rng sample_rng = stream(cfg.seed, 2, epoch, p);
        Rng sp_rng = stream(cfg.seed, 3, epoch, p);
        const data::Sample s = data::sample_block(data.train[it.scene], blocks[it.scene][it.block],
                                                  cfg.points_per_block, mode, sample_rng);
        SampleResult r = run_sample(out.params, cfg, s, use_sp, sp_rng);
        if (sum.empty()) {
          sum = std::move(r.grads);
        } else {
          for (std::size_t k = 0; k < sum.size(); ++k) {
            double* a = sum[k].data();
            const double* b = r.grads[k].data();
            for (std::size_t i = 0; i < sum[k].size(); ++i) a[i] += b[i];
          }
        }
        log.l_ins += r.l_ins;
        log.l_sem += r.l_sem;
        log.l_sp += r.l_sp;
        log.total += r.total;
        log.sp_skipped += r.sp_skipped;
        ++log.samples;
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (std::size_t k = 0; k < entries.size(); ++k) {
        Matrix& v = velocity[k];
        Matrix& w = entries[k].second;
        const Matrix& g = sum[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
          v.data()[i] = cfg.momentum * v.data()[i] + g.data()[i] * inv;
          w.data()[i] -= lr * v.data()[i];
        }
      }
    }
    const double n = static_cast<double>(log.samples);
    log.l_ins /= n;
    log.l_sem /= n;
    log.l_sp /= n;
    log.total /= n;
    for (const auto& e : entries) {
      if (!e.second.all_finite()) {
        throw Error("training diverged: non-finite values in " + e.first + " at epoch " +
                    std::to_string(epoch + 1));
      }
    }
    if (cfg.val_every > 0 && (epoch + 1) % cfg.val_every == 0 && !data.val.empty()) {
      log.validated = true;
      log.val = evaluate(out.params, cfg, data.val).summary;
    }
    if (opts.on_epoch) opts.on_epoch(log);
    out.log.push_back(log);
  }
  return out;
}

void write_train_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch\tlr\tl_ins\tl_sem\tl_sp\ttotal\tsp_skipped\tval_mIoU\tval_mPrec\tval_mWCov\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const EpochLog& e : log) {
    out << e.epoch << '\t' << num(e.lr) << '\t' << num(e.l_ins) << '\t' << num(e.l_sem) << '\t'
        << num(e.l_sp) << '\t' << num(e.total) << '\t' << e.sp_skipped;
    if (e.validated) {
      out << '\t' << num(e.val.miou) << '\t' << num(e.val.mprec) << '\t' << num(e.val.mwcov);
    } else {
      out << "\t-\t-\t-";
    }
    out << '\n';
  }
}

}  // namespace spseg::pipeline
