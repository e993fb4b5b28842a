#include "textpix_cli/settings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "textpix/error.hpp"

namespace textpix::cli {

std::string_view command_name(Command c) {
  switch (c) {
    case Command::gen_data: return "gen-data";
    case Command::train: return "train";
    case Command::sample: return "sample";
    case Command::eval: return "eval";
    case Command::grad_check: return "grad-check";
  }
  return "";
}

const std::vector<SettingSpec>& setting_specs() {
  using C = Command;
  static const std::vector<SettingSpec> specs = {
      {"profile", Kind::text, "desk", "paper", "desk or paper defaults", {}},
      {"seed", Kind::integer, "1", "1", "root seed for every random stream", {}},

      {"count", Kind::integer, "64", "64", "training examples", {C::gen_data}},
      {"test-count", Kind::integer, "16", "16", "held-out examples", {C::gen_data}},
      {"canvas", Kind::integer, "12", "60", "square canvas side in pixels", {C::gen_data}},
      {"glyph", Kind::text, "5x5", "28x28", "digit glyph size WxH", {C::gen_data}},
      {"levels", Kind::integer, "16", "256", "quantization levels Q", {C::gen_data}},
      {"layout", Kind::text, "pair", "mixed", "single, pair or mixed", {C::gen_data}},
      {"single-fraction", Kind::real, "0.3333333333333333", "0.3333333333333333",
       "share of single-digit images in mixed layout", {C::gen_data}},
      {"idx-images", Kind::text, "", "", "MNIST-format image file used as glyph source", {C::gen_data}, true},
      {"idx-labels", Kind::text, "", "", "MNIST-format label file used as glyph source", {C::gen_data}, true},

      {"data", Kind::text, "", "", "directory written by gen-data", {C::train, C::eval}},
      {"epochs", Kind::integer, "10", "10", "training epochs", {C::train}},
      {"lr", Kind::real, "0.001", "0.001", "RMSProp learning rate", {C::train}},
      {"clip", Kind::real, "1", "1", "global gradient norm threshold", {C::train}},
      {"batch", Kind::integer, "16", "16", "batch size", {C::train}},
      {"rms-decay", Kind::real, "0.9", "0.9", "RMSProp decay", {C::train}},
      {"rms-epsilon", Kind::real, "1e-08", "1e-08", "RMSProp epsilon", {C::train}},
      {"embed", Kind::integer, "32", "512", "word and pixel embedding width", {C::train}},
      {"encoder-width", Kind::integer, "32", "512", "encoder LSTM width per direction", {C::train}},
      {"decoder-width", Kind::integer, "64", "512", "decoder LSTM width", {C::train}},
      {"align-width", Kind::integer, "32", "512", "alignment layer width", {C::train}},
      {"layers", Kind::integer, "1", "1", "decoder LSTM layers", {C::train}},
      {"attention", Kind::text, "additive", "additive", "additive or general", {C::train, C::grad_check}},
      {"level-weights", Kind::list, "", "", "per-level loss weights, comma separated", {C::train}, true},
      {"threads", Kind::integer, "1", "1", "worker threads for per-item gradients", {C::train}},
      {"checkpoint-every", Kind::integer, "0", "0", "write a checkpoint every N epochs", {C::train}},
      {"overfit-one", Kind::boolean, "false", "false", "train on the first training example only", {C::train}},
      {"shuffle-captions", Kind::boolean, "false", "false",
       "permute captions across training images (unconditional control)", {C::train}},

      {"checkpoint", Kind::text, "", "", "checkpoint file", {C::sample, C::eval}},
      {"caption", Kind::text, "", "", "caption text", {C::sample}},
      {"count", Kind::integer, "1", "1", "images to write", {C::sample}},
      {"mode", Kind::text, "greedy", "greedy", "greedy, beam or stochastic", {C::sample}},
      {"beam-width", Kind::integer, "4", "4", "beam width", {C::sample}},
      {"attention-maps", Kind::boolean, "false", "false", "write attention grids next to each image", {C::sample}},

      {"split", Kind::text, "test", "test", "split to evaluate", {C::eval}},
      {"samples-per-caption", Kind::integer, "50", "50", "stochastic samples per caption for SSI", {C::eval}},
      {"ks", Kind::list, "1,5,10,50", "1,5,10,50", "recall cut-offs", {C::eval}},
      {"model-name", Kind::text, "alignPixelRNN", "alignPixelRNN", "row label of the metrics table", {C::eval}},
      {"ssim-window", Kind::integer, "0", "0", "SSIM sliding window side; 0 uses the whole image", {C::eval}},

      {"eps", Kind::real, "1e-05", "1e-05", "finite-difference step", {C::grad_check}},
      {"tolerance", Kind::real, "0.0001", "0.0001", "largest accepted relative error", {C::grad_check}},
      {"scale", Kind::real, "1", "1", "parameters are drawn uniformly from [-scale, scale]", {C::grad_check}},
  };
  return specs;
}

const SettingSpec* find_setting(std::string_view key) {
  for (const auto& s : setting_specs())
    if (s.key == key) return &s;
  return nullptr;
}

bool applies(const SettingSpec& spec, Command command) {
  return spec.commands.empty() ||
         std::find(spec.commands.begin(), spec.commands.end(), command) != spec.commands.end();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValueError("setting '" + std::string(key) + "': '" + std::string(text) + "' is not a valid number");
  }
  return value;
}

void check_value(const SettingSpec& spec, const std::string& value) {
  if (value.empty()) {
    if (spec.optional || spec.kind == Kind::text) return;
    throw ValueError("setting '" + spec.key + "' needs a value");
  }
  switch (spec.kind) {
    case Kind::integer:
      parse_number<std::uint64_t>(spec.key, value);
      break;
    case Kind::real:
      if (!std::isfinite(parse_number<double>(spec.key, value)))
        throw ValueError("setting '" + spec.key + "' must be finite");
      break;
    case Kind::boolean:
      if (value != "true" && value != "false") throw ValueError("setting '" + spec.key + "' must be true or false");
      break;
    case Kind::list:
      for (auto part : split_commas(value)) parse_number<double>(spec.key, part);
      break;
    case Kind::text:
      if (value.find_first_of("\n\r") != std::string::npos)
        throw ValueError("setting '" + spec.key + "' contains a line break");
      break;
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValueError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ValueError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig resolve(Command command, const std::map<std::string, std::string>& config_file,
                  const std::map<std::string, std::string>& flags) {
  for (const auto& [key, value] : config_file) {
    if (find_setting(key) == nullptr) throw ValueError("config file: unknown setting '" + key + "'");
  }
  std::string profile = "desk";
  if (auto it = config_file.find("profile"); it != config_file.end()) profile = it->second;
  if (auto it = flags.find("profile"); it != flags.end()) profile = it->second;
  if (profile != "desk" && profile != "paper") {
    throw ValueError("unknown profile '" + profile + "' (expected desk or paper)");
  }

  std::map<std::string, std::string> values;
  for (const auto& spec : setting_specs()) {
    if (!applies(spec, command)) continue;
    std::string value = profile == "paper" ? spec.paper : spec.desk;
    if (auto it = config_file.find(spec.key); it != config_file.end()) value = it->second;
    if (auto it = flags.find(spec.key); it != flags.end()) value = it->second;
    check_value(spec, value);
    values[spec.key] = value;
  }
  values["profile"] = profile;
  return RunConfig(command, std::move(values));
}

bool RunConfig::has(std::string_view key) const {
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::text(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValueError("setting '" + std::string(key) + "' is not available here");
  return it->second;
}

std::size_t RunConfig::size(std::string_view key) const {
  return static_cast<std::size_t>(parse_number<std::uint64_t>(key, text(key)));
}

std::uint64_t RunConfig::u64(std::string_view key) const { return parse_number<std::uint64_t>(key, text(key)); }

double RunConfig::real(std::string_view key) const { return parse_number<double>(key, text(key)); }

bool RunConfig::flag(std::string_view key) const { return text(key) == "true"; }

std::vector<double> RunConfig::reals(std::string_view key) const {
  std::vector<double> out;
  for (auto part : split_commas(text(key))) out.push_back(parse_number<double>(key, part));
  return out;
}

std::vector<std::size_t> RunConfig::sizes(std::string_view key) const {
  std::vector<std::size_t> out;
  for (auto part : split_commas(text(key))) out.push_back(parse_number<std::size_t>(key, part));
  return out;
}

std::pair<std::size_t, std::size_t> RunConfig::extent(std::string_view key) const {
  const std::string& t = text(key);
  const std::size_t x = t.find('x');
  if (x == std::string::npos) throw ValueError("setting '" + std::string(key) + "' must look like WxH");
  return {parse_number<std::size_t>(key, std::string_view(t).substr(0, x)),
          parse_number<std::size_t>(key, std::string_view(t).substr(x + 1))};
}

std::string RunConfig::to_text() const {
  std::string out = "# textpix " + std::string(command_name(command_)) + "\n";
  for (const auto& spec : setting_specs()) {
    if (!applies(spec, command_)) continue;
    auto it = values_.find(spec.key);
    if (it == values_.end()) continue;
    out += spec.key + " = " + it->second + "\n";
  }
  return out;
}

}  // namespace textpix::cli
