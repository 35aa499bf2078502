#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ivs/datapipe.hpp"
#include "ivs/network.hpp"

namespace ivs {

struct TrainingConfig {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 25;
  double train_fraction = 5.0 / 6.0;  // of trajectories, per subtask
  bool augment = true;                // random crop symmetry per sample and epoch
  void validate() const;
};

// Labeled samples grouped by trajectory so splits never mix frames of one demo.
using SubtaskData = std::vector<std::vector<LabeledSample>>;
SubtaskData label_dataset(std::span<const RawTrajectory> trajs, const Hyperparameters& hyper, const Camera& cam);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double heldout_loss = 0.0;
};

struct HeldoutMetrics {
  double loss = 0.0;
  double mean_angle_deg = 0.0;  // over samples with a nonzero action label
  double termination_accuracy = 0.0;
  int samples = 0;
};

struct TrainingReport {
  std::uint64_t seed = 0;
  int train_samples = 0;
  int heldout_samples = 0;
  double initial_heldout_loss = 0.0;
  std::vector<EpochStats> epochs;
  HeldoutMetrics final_metrics;
};

struct Split {
  std::vector<int> train;
  std::vector<int> heldout;
};
Split split_trajectories(int n, double train_fraction, std::uint64_t seed, Subtask subtask);

using EpochCallback = std::function<void(const EpochStats&)>;

TrainingReport train_member(Network<float>& member, const SubtaskData& pick, const SubtaskData& place,
                            const Hyperparameters& hyper, const TrainingConfig& cfg, std::uint64_t seed,
                            const EpochCallback& on_epoch = {});

HeldoutMetrics evaluate_member(const Network<float>& member, const SubtaskData& data,
                               std::span<const int> trajectories, Subtask subtask, double mu);

struct EnsemblePolicy {
  std::vector<Network<float>> members;
  std::vector<std::uint64_t> member_seeds;
  Hyperparameters hyper;

  int k() const { return static_cast<int>(members.size()); }
  // Votes needed, clamped to the ensemble size.
  int effective_kappa() const;
};

// Member i is initialized (and later trained) with seed + i.
EnsemblePolicy init_ensemble(int k, std::uint64_t seed, const Hyperparameters& hyper = {},
                             const Architecture& arch = Architecture::standard());

using MemberEpochCallback = std::function<void(int member, const EpochStats&)>;

// Members are independent and train concurrently on up to `threads` threads.
std::vector<TrainingReport> train_ensemble(EnsemblePolicy& policy, const SubtaskData& pick,
                                           const SubtaskData& place, const TrainingConfig& cfg,
                                           int threads = 1, const MemberEpochCallback& on_epoch = {});

// First k members, with hyper.k set to k.
EnsemblePolicy ensemble_prefix(const EnsemblePolicy& policy, int k);

struct QueryResult {
  Pose2 action;
  int termination = 0;
  int votes = 0;
  std::vector<NetOutput> members;
};

// Mean member action; termination iff at least kappa members give phi >= omega.
QueryResult combine_votes(std::span<const NetOutput> outputs, double omega, int kappa);
QueryResult query(const EnsemblePolicy& policy, const Image& image, Subtask subtask, int threads = 1);
// Same, with an explicit vote rule (kappa is clamped to [1, k]).
QueryResult query(const EnsemblePolicy& policy, const Image& image, Subtask subtask, double omega, int kappa,
                  int threads = 1);

void save_checkpoint(const EnsemblePolicy& policy, const std::filesystem::path& path);
EnsemblePolicy load_checkpoint(const std::filesystem::path& path);

}  // namespace ivs
