#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "textpix/checkpoint.hpp"
#include "textpix/decoder.hpp"
#include "textpix/params.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_nll = 0.0;
  double eval_nll = 0.0;  // NaN when there is no eval split

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  Checkpoint checkpoint;  // last good state
  std::vector<EpochRecord> history;
  double initial_train_nll = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const Checkpoint&)> on_checkpoint;  // every config.checkpoint_every epochs
};

// Each epoch runs ceil(|dataset| / batch_size) steps. A step draws batch_size items
// uniformly with replacement, averages their per-pixel NLL gradients, clips the global
// norm and applies RMSProp. Parameters come from derive_seed(seed, "init"), batches from
// derive_seed(seed, "batch"); the trajectory does not depend on `config.threads`.
TrainResult train(const TrainConfig& config, const Vocabulary& vocab,
                  std::span<const TrainingPair> dataset, std::span<const TrainingPair> eval,
                  const TrainHooks& hooks = {});

// Fresh checkpoint: initialized parameters, zero accumulators, step 0.
Checkpoint initial_checkpoint(const TrainConfig& config, const Vocabulary& vocab);

// Mean per-pixel NLL over a split; NaN for an empty split.
double mean_nll(std::span<const TrainingPair> split, const ModelParams& params,
                std::span<const double> level_weights = {});

// Loss and gradient of pair_nll for one item.
struct ItemGradient {
  double loss = 0.0;
  ParamSet grads;
};
ItemGradient item_gradient(const TrainingPair& pair, const ModelParams& params,
                           std::span<const double> level_weights = {});

}  // namespace textpix
