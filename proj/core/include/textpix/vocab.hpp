#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace textpix {

using TokenId = std::uint32_t;

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kFirstWord = 4;

  Vocabulary();
  // `words` receive ids 4, 5, ... in order; duplicates and empty words are rejected.
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return id_to_token_.size(); }
  std::size_t word_count() const { return size() - kFirstWord; }
  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::vector<std::string> words() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  std::map<std::string, TokenId, std::less<>> token_to_id_;
  std::vector<std::string> id_to_token_;
};

struct Caption {
  std::vector<TokenId> ids;
  std::size_t length() const { return ids.size(); }
  friend bool operator==(const Caption&, const Caption&) = default;
};

// Lowercases, deletes ASCII punctuation and splits on whitespace.
std::vector<std::string> normalize_words(std::string_view text);

// Frequency-ordered vocabulary; ties broken lexicographically, words seen fewer than
// `min_count` times are left out (they tokenize to UNK).
Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t min_count = 1);

Caption tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(const Caption& caption, const Vocabulary& vocab);

// One word per line; line k holds the word with id k + 4.
void write_vocab(const Vocabulary& vocab, std::ostream& out);
Vocabulary read_vocab(std::istream& in);
void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

}  // namespace textpix
