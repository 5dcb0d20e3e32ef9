#pragma once

#include <algorithm>
#include <numeric>

#include "gazekit/blazegaze.hpp"
#include "gazekit/model_io.hpp"
#include "gazekit/optim.hpp"

namespace gazekit::gaze {

template <class T>
struct TrainSample {
  nn::Tensor<T> patch;   // (H,W,3)
  nn::Tensor<T> pose12;  // raw flattened [R|t]
  Vector2d g = Vector2d::Zero();
  double w = 1.0;
  std::string user;
};

struct Stage1Config {
  int epochs = 20;
  int batch = 8;
  double lr = 1e-3;
  double decay = 0.95;
  LossWeights weights;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs <= 0 || batch <= 0 || !(lr > 0) || !(decay > 0))
      throw Error(ErrorCode::InvalidInput, "stage-1 config values must be positive");
    weights.validate();
  }
};

struct EpochStats {
  double total = 0, recon = 0, gaze = 0, consist = 0;
};

struct EpochLog {
  int epoch = 0;
  std::string split;
  EpochStats stats;
  double lr = 0;
};

struct Stage1Result {
  std::vector<EpochLog> log;
  double initial_val = 0;
  double best_val = 0;
  int best_epoch = 0;
  bool diverged = false;
};

// Training-split z-score constants for the pose input. Near-constant
// components keep a unit scale instead of exploding.
template <class T>
void fit_pose_normalization(BlazeGazeModel<T>& model,
                            const std::vector<TrainSample<T>>& train) {
  const std::size_t D = model.arch().pose_dim;
  std::vector<double> mean(D, 0), var(D, 0);
  for (const auto& s : train)
    for (std::size_t i = 0; i < D; ++i) mean[i] += static_cast<double>(s.pose12.v[i]);
  for (auto& m : mean) m /= static_cast<double>(train.size());
  for (const auto& s : train)
    for (std::size_t i = 0; i < D; ++i) {
      const double d = static_cast<double>(s.pose12.v[i]) - mean[i];
      var[i] += d * d;
    }
  for (std::size_t i = 0; i < D; ++i) {
    const double sd = std::sqrt(var[i] / static_cast<double>(train.size()));
    model.pose_mean().v[i] = static_cast<T>(mean[i]);
    model.pose_std().v[i] = static_cast<T>(sd > 1e-3 ? sd : 1.0);
  }
}

namespace detail {

// One batch: forward, losses, and (optionally) backward with accumulated
// parameter gradients. The encoder runs twice per sample because the
// consistency term needs the whole batch's embeddings before any gradient
// can flow.
template <class T>
EpochStats run_batch(BlazeGazeModel<T>& model,
                     const std::vector<const TrainSample<T>*>& batch,
                     const LossWeights& lw, bool backprop) {
  const std::size_t B = batch.size();
  std::vector<nn::Tensor<T>> zs(B);
  std::vector<Vector2d> gs(B);
  std::vector<double> ws(B);
  for (std::size_t i = 0; i < B; ++i) {
    zs[i] = model.encode(batch[i]->patch);
    gs[i] = batch[i]->g;
    ws[i] = batch[i]->w;
  }
  std::vector<nn::Tensor<T>> gz_consist;
  EpochStats stats;
  if (B >= 2) {
    stats.consist = loss_consistency<T>(zs, gs, ws, kConsistencyEps,
                                        backprop ? &gz_consist : nullptr);
  }

  std::vector<nn::Tensor<T>> preds(B);
  double recon_acc = 0;
  for (std::size_t i = 0; i < B; ++i) {
    const auto& s = *batch[i];
    const auto z = backprop ? model.encode(s.patch) : zs[i];
    const auto recon = model.decode(z);
    nn::Tensor<T> grad_recon;
    recon_acc += loss_reconstruction(s.patch, recon, backprop ? &grad_recon : nullptr);
    const auto pose_n = model.normalize_pose(s.pose12);
    preds[i] = model.gaze_head().forward(model.head_input(z, pose_n));

    if (!backprop) continue;

    // Per-sample gaze-loss gradient (the batch mean splits per sample).
    nn::Tensor<T> gpred({2});
    const double dx = static_cast<double>(preds[i].v[0]) - s.g.x();
    const double dy = static_cast<double>(preds[i].v[1]) - s.g.y();
    gpred.v[0] = static_cast<T>(lw.beta_g * 2.0 * s.w * dx / static_cast<double>(B));
    gpred.v[1] = static_cast<T>(lw.beta_g * 2.0 * s.w * dy / static_cast<double>(B));
    const auto ghead_in = model.gaze_head().backward(gpred);

    for (auto& v : grad_recon.v) v = static_cast<T>(lw.beta_r) * v;
    const auto gz_dec = model.decoder().backward(grad_recon);

    nn::Tensor<T> gz(zs[i].shape);
    for (std::size_t d = 0; d < gz.size(); ++d) {
      gz.v[d] = gz_dec.v[d] + ghead_in.v[d];
      if (!gz_consist.empty())
        gz.v[d] += static_cast<T>(lw.beta_c) * gz_consist[i].v[d];
    }
    model.encoder().backward(gz);
  }
  stats.recon = recon_acc / static_cast<double>(B);
  stats.gaze = loss_gaze<T>(preds, gs, ws);
  stats.total = loss_total(stats.recon, stats.gaze, stats.consist, lw);
  return stats;
}

template <class T>
EpochStats evaluate(BlazeGazeModel<T>& model, const std::vector<TrainSample<T>>& set,
                    const Stage1Config& cfg) {
  EpochStats acc;
  std::size_t n = 0;
  for (std::size_t start = 0; start < set.size(); start += cfg.batch) {
    std::vector<const TrainSample<T>*> batch;
    for (std::size_t i = start; i < std::min(set.size(), start + cfg.batch); ++i)
      batch.push_back(&set[i]);
    const auto s = run_batch(model, batch, cfg.weights, false);
    const double bn = static_cast<double>(batch.size());
    acc.total += s.total * bn;
    acc.recon += s.recon * bn;
    acc.gaze += s.gaze * bn;
    acc.consist += s.consist * bn;
    n += batch.size();
  }
  acc.total /= n;
  acc.recon /= n;
  acc.gaze /= n;
  acc.consist /= n;
  return acc;
}

}  // namespace detail

// Joint encoder/decoder/head training. Tracks the best validation loss and
// returns with the best parameters restored; a non-finite loss aborts with
// the last good checkpoint.
template <class T>
Stage1Result train_stage1(BlazeGazeModel<T>& model,
                          const std::vector<TrainSample<T>>& train,
                          const std::vector<TrainSample<T>>& val,
                          const Stage1Config& cfg) {
  cfg.validate();
  if (train.empty() || val.empty())
    throw Error(ErrorCode::InvalidInput, "stage-1 needs train and validation data");

  fit_pose_normalization(model, train);
  auto params = model.all_params();
  auto opt = nn::Optimizer<T>::adam(cfg.lr);
  opt.enable_decay(cfg.decay);
  Rng rng(cfg.seed);

  Stage1Result res;
  const auto val0 = detail::evaluate(model, val, cfg);
  res.initial_val = val0.total;
  res.best_val = val0.total;
  res.best_epoch = 0;
  res.log.push_back({0, "val", val0, cfg.lr});
  auto best = nn::snapshot_params(params);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_epoch(epoch - 1);
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats train_acc;
    std::size_t seen = 0;
    bool bad = false;
    try {
      for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
        std::vector<const TrainSample<T>*> batch;
        for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch); ++i)
          batch.push_back(&train[order[i]]);
        model.encoder().zero_grad();
        model.decoder().zero_grad();
        model.gaze_head().zero_grad();
        const auto s = detail::run_batch(model, batch, cfg.weights, true);
        if (!is_finite(s.total)) throw Error(ErrorCode::TrainingDiverged, "loss is non-finite");
        opt.step(params);
        const double bn = static_cast<double>(batch.size());
        train_acc.total += s.total * bn;
        train_acc.recon += s.recon * bn;
        train_acc.gaze += s.gaze * bn;
        train_acc.consist += s.consist * bn;
        seen += batch.size();
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TrainingDiverged) throw;
      bad = true;
    }
    if (bad) {
      nn::restore_params(params, best);
      res.diverged = true;
      break;
    }
    train_acc.total /= seen;
    train_acc.recon /= seen;
    train_acc.gaze /= seen;
    train_acc.consist /= seen;
    res.log.push_back({epoch, "train", train_acc, opt.current_lr()});

    const auto vs = detail::evaluate(model, val, cfg);
    res.log.push_back({epoch, "val", vs, opt.current_lr()});
    if (vs.total < res.best_val) {
      res.best_val = vs.total;
      res.best_epoch = epoch;
      best = nn::snapshot_params(params);
    }
  }
  nn::restore_params(params, best);
  return res;
}

}  // namespace gazekit::gaze
