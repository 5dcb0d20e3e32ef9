#pragma once

#include <cstdint>
#include <string>

namespace cli {

struct SynthOpts {
  std::string out;
  std::string preset;  // "bench8" fills the remaining fields
  int train_users = 5, val_users = 1, meta_test_users = 2;
  int samples = 100;
  double noise = 0.0, blink_rate = 0.0;
  double depth_min = 45, depth_max = 75;
  int patch_h = 32, patch_w = 128;
  std::uint64_t seed = 1;
};

struct PoseOpts {
  std::string data, out;
  double z0 = 60, beta = 0.1, delta_max = 5, z_stop = 0.25;
  int max_iters = 10;
};

struct PretrainOpts {
  std::string data, out;
  std::string arch = "reduced";
  int epochs = 20, batch = 8;
  double lr = 1e-3, decay = 0.95;
  double beta_r = 1.0, beta_g = 1.0, beta_c = 0.5;
  std::uint64_t seed = 1;
};

struct MetatrainOpts {
  std::string data, model, out;
  int steps = 1000, inner_updates = 5, k = 9, l = 100, task_batch = 1;
  double inner_lr = 1e-5, outer_lr = 1e-3;
  std::uint64_t seed = 1;
};

struct AdaptOpts {
  std::string data, model, meta_head, out, user;
  std::string append_from;  // previous personalized head for clickstream growth
  int k = 9, inner_updates = 5, new_count = 3, max_support = 64;
  std::int64_t from_ts = -1;
  double inner_lr = 1e-5;
};

struct EvalOpts {
  std::string data, model, head, out;
  std::string users = "meta_test";  // split name or comma-separated ids
  double blink_threshold = 0.2;
};

struct BenchOpts {
  std::string out;
  std::string arch = "full";
  int latency_runs = 200;
  bool skip_latency = false;
  std::uint64_t seed = 1;
};

struct ReportOpts {
  std::string in, out;
};

int cmd_synth(const SynthOpts&);
int cmd_pose(const PoseOpts&);
int cmd_pretrain(const PretrainOpts&);
int cmd_metatrain(const MetatrainOpts&);
int cmd_adapt(const AdaptOpts&);
int cmd_eval(const EvalOpts&);
int cmd_bench(const BenchOpts&);
int cmd_report(const ReportOpts&);

}  // namespace cli
