#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace textpix::cli {

enum class Command { gen_data, train, sample, eval, grad_check };

std::string_view command_name(Command c);

enum class Kind { text, integer, real, boolean, list };

struct SettingSpec {
  std::string key;  // also the long flag name
  Kind kind = Kind::text;
  std::string desk;
  std::string paper;
  std::string help;
  std::vector<Command> commands;  // empty: every command
  bool optional = false;          // may stay unset
};

const std::vector<SettingSpec>& setting_specs();
const SettingSpec* find_setting(std::string_view key);
bool applies(const SettingSpec& spec, Command command);

// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Fully resolved settings for one command, in registry order.
class RunConfig {
 public:
  RunConfig() = default;
  RunConfig(Command command, std::map<std::string, std::string> values)
      : command_(command), values_(values.begin(), values.end()) {}

  Command command() const { return command_; }
  bool has(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  std::size_t size(std::string_view key) const;
  std::uint64_t u64(std::string_view key) const;
  double real(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::vector<double> reals(std::string_view key) const;
  std::vector<std::size_t> sizes(std::string_view key) const;
  // "WxH" pairs such as the glyph size.
  std::pair<std::size_t, std::size_t> extent(std::string_view key) const;

  // `key = value` lines for this command, registry order.
  std::string to_text() const;

 private:
  Command command_ = Command::gen_data;
  std::map<std::string, std::string, std::less<>> values_;
};

// defaults of the profile < config file < explicit flags. Unknown keys in the config file
// are rejected; keys that belong to other commands are ignored.
RunConfig resolve(Command command, const std::map<std::string, std::string>& config_file,
                  const std::map<std::string, std::string>& flags);

}  // namespace textpix::cli
