#pragma once

#include "gazekit/layers.hpp"
#include "gazekit/losses.hpp"
#include "gazekit/model_io.hpp"
#include "gazekit/optim.hpp"

namespace gazekit::meta {

using gaze::Vector2d;

// The gaze head sees a ready-made input vector: cached embedding
// concatenated with the z-scored pose. Tasks are plain sample lists.
template <class T>
struct HeadSample {
  nn::Tensor<T> input;
  Vector2d g = Vector2d::Zero();
  double w = 1.0;
  std::int64_t ts = 0;
};

template <class T>
struct Task {
  std::string user_id;
  std::vector<HeadSample<T>> support;
  std::vector<HeadSample<T>> query;
};

struct MetaConfig {
  double inner_lr = 1e-5;  // SGD, support set
  double outer_lr = 1e-3;  // Adam, meta update
  int meta_steps = 1000;
  int inner_updates = 5;
  int k = 9;
  int l = 100;
  int task_batch = 1;
  int max_support = 64;  // personalization support cap before eviction
  std::uint64_t seed = 0;

  void validate() const {
    if (inner_lr < 0 || !(outer_lr > 0) || meta_steps <= 0 || inner_updates <= 0 ||
        k <= 0 || l <= 0 || task_batch <= 0 || max_support <= 0)
      throw Error(ErrorCode::InvalidInput, "meta config values must be positive");
  }
};

template <class T>
using ParamValues = std::vector<nn::Tensor<T>>;

// Weighted L2 gaze loss over a sample set; gradients accumulate into the
// head's parameter buffers when backprop is set.
template <class T>
double head_loss_grad(nn::Sequential<T>& head,
                      const std::vector<HeadSample<T>>& samples, bool backprop) {
  if (samples.empty())
    throw Error(ErrorCode::InvalidInput, "empty sample set for head loss");
  const double B = static_cast<double>(samples.size());
  double acc = 0;
  for (const auto& s : samples) {
    const auto pred = head.forward(s.input);
    const double dx = static_cast<double>(pred.v[0]) - s.g.x();
    const double dy = static_cast<double>(pred.v[1]) - s.g.y();
    acc += s.w * (dx * dx + dy * dy);
    if (backprop) {
      nn::Tensor<T> gp({2});
      gp.v[0] = static_cast<T>(2.0 * s.w * dx / B);
      gp.v[1] = static_cast<T>(2.0 * s.w * dy / B);
      head.backward(gp);
    }
  }
  return acc / B;
}

template <class T>
struct AdaptResult {
  ParamValues<T> params;
  bool ok = true;
  int steps_run = 0;
  std::string diagnostic;
};

// `steps` SGD updates on the support loss, starting from theta. The head is
// used as scratch space; theta itself is never modified.
template <class T>
AdaptResult<T> inner_adapt(nn::Sequential<T>& head, const ParamValues<T>& theta,
                           const std::vector<HeadSample<T>>& support, double alpha,
                           int steps) {
  if (support.empty())
    throw Error(ErrorCode::InvalidInput, "inner adaptation needs a support set");
  auto params = head.params();
  nn::restore_params(params, theta);
  AdaptResult<T> res;
  for (int s = 0; s < steps; ++s) {
    head.zero_grad();
    const double loss = head_loss_grad(head, support, true);
    if (!is_finite(loss)) {
      nn::restore_params(params, theta);
      res.params = theta;
      res.ok = false;
      res.diagnostic = "non-finite support loss at step " + std::to_string(s);
      return res;
    }
    for (auto* p : params)
      for (std::size_t i = 0; i < p->w.size(); ++i)
        p->w.v[i] -= static_cast<T>(alpha) * p->g.v[i];
    res.steps_run = s + 1;
  }
  res.params = nn::snapshot_params(params);
  return res;
}

// First-order MAML step: adapt per task, evaluate the query gradient at the
// adapted weights, and apply the summed gradient to theta with the outer
// optimizer. Returns the meta-loss (sum of post-adaptation query losses).
template <class T>
double meta_step(nn::Sequential<T>& head, ParamValues<T>& theta,
                 const std::vector<Task<T>>& tasks, const MetaConfig& cfg,
                 nn::Optimizer<T>& outer) {
  cfg.validate();
  if (tasks.empty()) throw Error(ErrorCode::InvalidInput, "meta step needs tasks");
  auto params = head.params();
  std::vector<nn::Tensor<T>> meta_grad;
  meta_grad.reserve(params.size());
  for (auto* p : params) meta_grad.emplace_back(p->w.shape);

  double meta_loss = 0;
  for (const auto& task : tasks) {
    const auto adapted = inner_adapt(head, theta, task.support, cfg.inner_lr,
                                     cfg.inner_updates);
    nn::restore_params(params, adapted.params);
    head.zero_grad();
    meta_loss += head_loss_grad(head, task.query, true);
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t j = 0; j < meta_grad[i].size(); ++j)
        meta_grad[i].v[j] += params[i]->g.v[j];
  }

  nn::restore_params(params, theta);
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->g = meta_grad[i];
  outer.step(params);
  theta = nn::snapshot_params(params);
  return meta_loss;
}

template <class T>
std::string support_hash(const std::vector<HeadSample<T>>& support) {
  io::Container c;
  int idx = 0;
  for (const auto& s : support) {
    nn::Tensor<double> rec({s.input.size() + 4});
    for (std::size_t i = 0; i < s.input.size(); ++i)
      rec.v[i] = static_cast<double>(s.input.v[i]);
    rec.v[s.input.size()] = s.g.x();
    rec.v[s.input.size() + 1] = s.g.y();
    rec.v[s.input.size() + 2] = s.w;
    rec.v[s.input.size() + 3] = static_cast<double>(s.ts);
    c.put("s" + std::to_string(idx++), rec);
  }
  const auto bytes = c.serialize();
  return io::sha256_hex(bytes.data(), bytes.size());
}

template <class T>
struct PersonalizedHead {
  ParamValues<T> params;
  std::vector<HeadSample<T>> support;  // retained for incremental calibration
  std::string meta_checkpoint_hash;
  std::string support_set_hash;
  int inner_steps = 0;
  int evicted = 0;
};

template <class T>
PersonalizedHead<T> personalize(nn::Sequential<T>& head,
                                const ParamValues<T>& theta_star,
                                const std::string& theta_hash,
                                std::vector<HeadSample<T>> support,
                                const MetaConfig& cfg) {
  cfg.validate();
  if (support.empty())
    throw Error(ErrorCode::InvalidInput, "personalization needs support samples");
  PersonalizedHead<T> out;
  if (static_cast<int>(support.size()) > cfg.max_support) {
    // Evict oldest first (clickstream cap).
    std::stable_sort(support.begin(), support.end(),
                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
    out.evicted = static_cast<int>(support.size()) - cfg.max_support;
    support.erase(support.begin(), support.begin() + out.evicted);
  }
  const auto adapted =
      inner_adapt(head, theta_star, support, cfg.inner_lr, cfg.inner_updates);
  out.params = adapted.params;
  out.support = std::move(support);
  out.meta_checkpoint_hash = theta_hash;
  out.support_set_hash = support_hash(out.support);
  out.inner_steps = adapted.steps_run;
  return out;
}

// Clickstream growth: new samples extend the support set and adaptation
// restarts from theta-star, never from the previous personalized weights.
template <class T>
PersonalizedHead<T> append_calibration(nn::Sequential<T>& head,
                                       const ParamValues<T>& theta_star,
                                       const std::string& theta_hash,
                                       const PersonalizedHead<T>& prev,
                                       const std::vector<HeadSample<T>>& new_samples,
                                       const MetaConfig& cfg) {
  auto support = prev.support;
  support.insert(support.end(), new_samples.begin(), new_samples.end());
  return personalize(head, theta_star, theta_hash, std::move(support), cfg);
}

// Deterministic task construction: support comes from the user's dot-test
// grid samples, the query from the remaining pool.
template <class T>
Task<T> build_task(const std::string& user_id,
                   const std::vector<HeadSample<T>>& grid_pool,
                   const std::vector<HeadSample<T>>& query_pool, int k, int l,
                   Rng& rng) {
  if (grid_pool.empty() || query_pool.empty())
    throw Error(ErrorCode::InvalidInput, "task pools empty for " + user_id);
  Task<T> task;
  task.user_id = user_id;
  for (int i = 0; i < k && i < static_cast<int>(grid_pool.size()); ++i)
    task.support.push_back(grid_pool[i]);
  std::vector<std::size_t> idx(query_pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int i = 0; i < l && i < static_cast<int>(idx.size()); ++i)
    task.query.push_back(query_pool[idx[i]]);
  return task;
}

// Personalized heads persist with full provenance plus their support set so
// later clickstream appends can extend it.
template <class T>
void save_personalized(const std::string& path, const PersonalizedHead<T>& head,
                       const std::vector<std::string>& param_names,
                       std::map<std::string, std::string> extra_meta = {}) {
  if (param_names.size() != head.params.size())
    throw Error(ErrorCode::ShapeMismatch, "personalized head name/param mismatch");
  io::Container c;
  c.meta = std::move(extra_meta);
  c.meta["format"] = "personalized-head";
  c.meta["meta_checkpoint"] = head.meta_checkpoint_hash;
  c.meta["support_hash"] = head.support_set_hash;
  c.meta["inner_steps"] = std::to_string(head.inner_steps);
  c.meta["evicted"] = std::to_string(head.evicted);
  c.meta["support_count"] = std::to_string(head.support.size());
  for (std::size_t i = 0; i < head.params.size(); ++i)
    c.put(param_names[i], head.params[i]);
  for (std::size_t i = 0; i < head.support.size(); ++i) {
    const auto& s = head.support[i];
    c.put("support/" + std::to_string(i) + "/input", s.input);
    nn::Tensor<double> label({4});
    label.v = {s.g.x(), s.g.y(), s.w, static_cast<double>(s.ts)};
    c.put("support/" + std::to_string(i) + "/label", label);
  }
  c.save(path);
}

template <class T>
PersonalizedHead<T> load_personalized(const std::string& path,
                                      const std::vector<std::string>& param_names) {
  const auto c = io::Container::load(path);
  if (c.meta.count("format") == 0 || c.meta.at("format") != "personalized-head")
    throw Error(ErrorCode::SchemaViolation, "not a personalized head: " + path);
  PersonalizedHead<T> head;
  head.meta_checkpoint_hash = c.meta.at("meta_checkpoint");
  head.support_set_hash = c.meta.at("support_hash");
  head.inner_steps = std::stoi(c.meta.at("inner_steps"));
  head.evicted = std::stoi(c.meta.at("evicted"));
  for (const auto& name : param_names)
    head.params.push_back(c.get(name).template as<T>());
  const std::size_t n = std::stoul(c.meta.at("support_count"));
  for (std::size_t i = 0; i < n; ++i) {
    HeadSample<T> s;
    s.input = c.get("support/" + std::to_string(i) + "/input").template as<T>();
    const auto label = c.get("support/" + std::to_string(i) + "/label").template as<double>();
    s.g = {label.v[0], label.v[1]};
    s.w = label.v[2];
    s.ts = static_cast<std::int64_t>(label.v[3]);
    head.support.push_back(std::move(s));
  }
  return head;
}

}  // namespace gazekit::meta
