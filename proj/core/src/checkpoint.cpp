#include "textpix/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <zlib.h>

#include "textpix/error.hpp"

namespace textpix {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

// ---- TrainConfig text -------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValueError("learning_rate must be positive");
  if (!(clip_norm > 0.0)) throw ValueError("clip_norm must be positive");
  if (batch_size < 1) throw ValueError("batch_size must be at least 1");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw ValueError("rms_decay must lie in [0, 1)");
  if (!(rms_epsilon > 0.0)) throw ValueError("rms_epsilon must be positive");
  if (threads < 1) throw ValueError("threads must be at least 1");
  if (!level_weights.empty() && level_weights.size() != dims.levels) {
    throw ValueError("level_weights needs one entry per quantization level");
  }
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw FormatError("config key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw FormatError("config key '" + key + "': '" + s + "' is not a non-negative integer");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << "learning_rate = " << format_double(c.learning_rate) << '\n'
     << "clip_norm = " << format_double(c.clip_norm) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "epochs = " << c.epochs << '\n'
     << "seed = " << c.seed << '\n'
     << "rms_decay = " << format_double(c.rms_decay) << '\n'
     << "rms_epsilon = " << format_double(c.rms_epsilon) << '\n'
     << "level_weights = ";
  for (std::size_t i = 0; i < c.level_weights.size(); ++i)
    os << (i ? "," : "") << format_double(c.level_weights[i]);
  os << '\n'
     << "threads = " << c.threads << '\n'
     << "checkpoint_every = " << c.checkpoint_every << '\n'
     << "vocab_size = " << c.dims.vocab_size << '\n'
     << "embed_dim = " << c.dims.embed_dim << '\n'
     << "encoder_width = " << c.dims.encoder_width << '\n'
     << "decoder_width = " << c.dims.decoder_width << '\n'
     << "align_width = " << c.dims.align_width << '\n'
     << "decoder_layers = " << c.dims.decoder_layers << '\n'
     << "levels = " << c.dims.levels << '\n'
     << "height = " << c.dims.height << '\n'
     << "width = " << c.dims.width << '\n'
     << "attention = " << to_string(c.dims.attention) << '\n';
  return os.str();
}

TrainConfig train_config_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("config is missing key '" + key + "'");
    return it->second;
  };
  auto get_size = [&](const std::string& key) {
    return static_cast<std::size_t>(parse_uint(get(key), key));
  };
  TrainConfig c;
  c.learning_rate = parse_double(get("learning_rate"), "learning_rate");
  c.clip_norm = parse_double(get("clip_norm"), "clip_norm");
  c.batch_size = get_size("batch_size");
  c.epochs = get_size("epochs");
  c.seed = parse_uint(get("seed"), "seed");
  c.rms_decay = parse_double(get("rms_decay"), "rms_decay");
  c.rms_epsilon = parse_double(get("rms_epsilon"), "rms_epsilon");
  const std::string& weights = get("level_weights");
  if (!weights.empty()) {
    std::istringstream ws(weights);
    std::string item;
    while (std::getline(ws, item, ',')) c.level_weights.push_back(parse_double(trim(item), "level_weights"));
  }
  c.threads = get_size("threads");
  c.checkpoint_every = get_size("checkpoint_every");
  c.dims.vocab_size = get_size("vocab_size");
  c.dims.embed_dim = get_size("embed_dim");
  c.dims.encoder_width = get_size("encoder_width");
  c.dims.decoder_width = get_size("decoder_width");
  c.dims.align_width = get_size("align_width");
  c.dims.decoder_layers = get_size("decoder_layers");
  c.dims.levels = get_size("levels");
  c.dims.height = get_size("height");
  c.dims.width = get_size("width");
  try {
    c.dims.attention = attention_kind_from_string(get("attention"));
  } catch (const ValueError& e) {
    throw FormatError(e.what());
  }
  return c;
}

// ---- binary encoding --------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'X', 'P', 'X', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) u64(d);
    raw(t.data().data(), t.size() * sizeof(double));
  }
  void params(const ParamSet& p) {
    u32(static_cast<std::uint32_t>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) tensor(p.name(i), p[i]);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  const std::vector<std::uint8_t>& bytes() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}

  void raw(void* dst, std::size_t n) {
    if (static_cast<std::size_t>(end_ - p_) < n) throw FormatError("checkpoint is truncated");
    std::memcpy(dst, p_, n);
    p_ += n;
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  std::string str() {
    const std::uint32_t n = u32();
    if (static_cast<std::size_t>(end_ - p_) < n) throw FormatError("checkpoint is truncated");
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }
  std::pair<std::string, Tensor> tensor() {
    std::string name = str();
    const std::uint32_t rank = u32();
    if (rank > 8) throw FormatError("checkpoint tensor '" + name + "' has implausible rank");
    Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = u64();
      if (d == 0 || d > (std::size_t{1} << 32)) throw FormatError("checkpoint tensor '" + name + "' has a bad extent");
      count *= d;
    }
    if (count > static_cast<std::size_t>(end_ - p_) / sizeof(double)) throw FormatError("checkpoint is truncated");
    std::vector<double> data(count);
    raw(data.data(), count * sizeof(double));
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
  }
  ParamSet params() {
    const std::uint32_t n = u32();
    ParamSet p;
    for (std::uint32_t i = 0; i < n; ++i) {
      auto [name, t] = tensor();
      p.add(std::move(name), std::move(t));
    }
    return p;
  }
  bool done() const { return p_ == end_; }

 private:
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

std::uint32_t checksum(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(c.version);
  w.str(to_text(c.config));
  w.u64(c.step);
  const auto words = c.vocab.words();
  w.u32(static_cast<std::uint32_t>(words.size()));
  for (const auto& word : words) w.str(word);
  w.params(c.params.tensors);
  w.u64(c.opt.step);
  w.params(c.opt.accumulators);
  const std::uint32_t crc = checksum(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 8) throw FormatError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw FormatError("not a textpix checkpoint (bad magic)");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  if (stored != checksum(bytes.data(), body)) throw FormatError("checkpoint checksum mismatch (corrupt or truncated)");

  Reader r(bytes.data(), body);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  Checkpoint c;
  c.version = r.u32();
  c.config = train_config_from_text(r.str());
  c.step = r.u64();
  std::vector<std::string> words(r.u32());
  for (auto& word : words) word = r.str();
  try {
    c.vocab = Vocabulary(words);
  } catch (const ValueError& e) {
    throw FormatError(std::string("checkpoint vocabulary: ") + e.what());
  }
  c.params = assemble_model(c.config.dims, r.params());
  c.opt.step = r.u64();
  c.opt.accumulators = r.params();
  if (!c.opt.accumulators.same_layout(c.params.tensors)) {
    throw FormatError("checkpoint optimizer state does not match the parameter layout");
  }
  if (!r.done()) throw FormatError("checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read checkpoint " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace textpix
