#include "textpix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "textpix/error.hpp"
#include "textpix/optim.hpp"
#include "textpix/rng.hpp"

namespace textpix {

Checkpoint initial_checkpoint(const TrainConfig& config, const Vocabulary& vocab) {
  Checkpoint c;
  c.config = config;
  c.config.dims.vocab_size = vocab.size();
  c.config.validate();
  c.vocab = vocab;
  c.params = init_model(c.config.dims, derive_seed(config.seed, "init"));
  c.opt = make_opt_state(c.params.tensors);
  return c;
}

double mean_nll(std::span<const TrainingPair> split, const ModelParams& params,
                std::span<const double> level_weights) {
  if (split.empty()) return std::numeric_limits<double>::quiet_NaN();
  return nll_loss(split, params, level_weights);
}

ItemGradient item_gradient(const TrainingPair& pair, const ModelParams& params,
                           std::span<const double> level_weights) {
  Tape tape;
  const BoundModel model = bind_model(tape, params, true);
  Var loss = pair_nll(pair, model, level_weights);
  tape.backward(loss);
  return {loss.value()[0], collect_gradients(tape, model.vars, params.tensors)};
}

namespace {

// Per-item gradients for the distinct indices of a batch, computed in parallel when
// asked; results are keyed by index so the reduction order never depends on scheduling.
std::map<std::size_t, ItemGradient> batch_gradients(const std::vector<std::size_t>& unique,
                                                    std::span<const TrainingPair> dataset,
                                                    const ModelParams& params,
                                                    std::span<const double> weights,
                                                    std::size_t threads) {
  std::vector<ItemGradient> results(unique.size());
  const std::size_t workers = std::min(threads, unique.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < unique.size(); ++k)
      results[k] = item_gradient(dataset[unique[k]], params, weights);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < unique.size(); k += workers)
            results[k] = item_gradient(dataset[unique[k]], params, weights);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::map<std::size_t, ItemGradient> out;
  for (std::size_t k = 0; k < unique.size(); ++k) out.emplace(unique[k], std::move(results[k]));
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& config, const Vocabulary& vocab,
                  std::span<const TrainingPair> dataset, std::span<const TrainingPair> eval,
                  const TrainHooks& hooks) {
  TrainResult result;
  Checkpoint state = initial_checkpoint(config, vocab);
  const TrainConfig cfg = state.config;
  const std::span<const double> weights = cfg.level_weights;

  if (cfg.epochs > 0 && dataset.empty()) throw ValueError("train: empty dataset");
  for (const auto& pair : dataset) check_image_for_model(pair.image, cfg.dims);
  for (const auto& pair : eval) check_image_for_model(pair.image, cfg.dims);
  if (cfg.epochs == 0) {
    result.checkpoint = std::move(state);
    return result;
  }

  result.initial_train_nll = mean_nll(dataset, state.params, weights);
  Rng batch_rng(derive_seed(cfg.seed, "batch"));
  const std::size_t steps_per_epoch = (dataset.size() + cfg.batch_size - 1) / cfg.batch_size;
  const RmsPropOptions rms{cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon};
  const double batch = static_cast<double>(cfg.batch_size);
  Checkpoint last_good = state;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      std::vector<std::size_t> picks(cfg.batch_size);
      for (auto& p : picks) p = static_cast<std::size_t>(batch_rng.below(dataset.size()));
      std::vector<std::size_t> unique = picks;
      std::sort(unique.begin(), unique.end());
      unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

      // Identical items yield identical gradients, so each distinct item is evaluated once
      // and summed once per occurrence, in draw order.
      auto items = batch_gradients(unique, dataset, state.params, weights, cfg.threads);
      ParamSet grads = state.params.tensors.zeros_like();
      double loss = 0.0;
      for (std::size_t k = 0; k < picks.size(); ++k) {
        const ItemGradient& item = items.at(picks[k]);
        loss = (k == 0) ? item.loss : loss + item.loss;
        for (std::size_t t = 0; t < grads.size(); ++t) {
          auto dst = grads[t].data();
          auto src = item.grads[t].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
      }
      loss /= batch;
      for (std::size_t t = 0; t < grads.size(); ++t)
        for (double& g : grads[t].data()) g /= batch;

      // The parameters that produced a non-finite loss are discarded along with the
      // update that led to them.
      if (!std::isfinite(loss)) {
        result.aborted = true;
        result.abort_reason = "non-finite training loss at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(state.step + 1);
        result.checkpoint = std::move(last_good);
        return result;
      }
      try {
        clip_gradients(grads, cfg.clip_norm);
      } catch (const NumericalError& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        result.checkpoint = std::move(last_good);
        return result;
      }
      last_good = state;
      rmsprop_update(state.params.tensors, grads, state.opt, rms);
      ++state.step;
      epoch_loss += loss;
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(steps_per_epoch),
                       mean_nll(eval, state.params, weights)};
    result.history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 && hooks.on_checkpoint)
      hooks.on_checkpoint(state);
  }
  result.checkpoint = std::move(state);
  return result;
}

}  // namespace textpix
