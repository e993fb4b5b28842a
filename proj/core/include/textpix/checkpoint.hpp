#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "textpix/optim.hpp"
#include "textpix/params.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

struct TrainConfig {
  double learning_rate = 0.001;
  double clip_norm = 1.0;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-8;
  std::vector<double> level_weights;  // empty: plain cross-entropy
  std::size_t threads = 1;
  std::size_t checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  ModelDims dims;                    // vocab_size is taken from the vocabulary

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// `key = value` lines, one per field, in a fixed order.
std::string to_text(const TrainConfig& config);
TrainConfig train_config_from_text(const std::string& text);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  TrainConfig config;
  ModelParams params;
  OptState opt;
  Vocabulary vocab;
  std::uint64_t step = 0;
};

// Little-endian layout:
//   "TXPXCKPT" | u32 version | str config | u64 step | u32 n, str word * n
//   | u32 n, tensor * n (params) | u64 opt step | u32 n, tensor * n (accumulators)
//   | u32 crc32 of all preceding bytes
// str = u32 length + bytes; tensor = str name | u32 rank | u64 extent * rank | f64 * size
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace textpix
