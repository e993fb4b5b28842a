#include "textpix/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "textpix/error.hpp"

namespace textpix {

Vocabulary::Vocabulary() : id_to_token_{"<pad>", "<bos>", "<eos>", "<unk>"} {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
  for (const auto& w : words) {
    if (w.empty()) throw ValueError("vocabulary words must be non-empty");
    if (token_to_id_.contains(w)) throw ValueError("duplicate vocabulary word '" + w + "'");
    token_to_id_.emplace(w, static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.push_back(w);
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return token_to_id_.contains(token); }

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= id_to_token_.size()) throw ValueError("token id " + std::to_string(id) + " out of range");
  return id_to_token_[id];
}

std::vector<std::string> Vocabulary::words() const {
  return {id_to_token_.begin() + kFirstWord, id_to_token_.end()};
}

std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (std::ispunct(ch)) {
      continue;
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t min_count) {
  if (corpus.empty()) throw ValueError("build_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus)
    for (auto& w : normalize_words(text)) ++counts[w];

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [w, n] : counts)
    if (n >= min_count) ranked.emplace_back(w, n);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [w, n] : ranked) words.push_back(w);
  return Vocabulary(words);
}

Caption tokenize(std::string_view text, const Vocabulary& vocab) {
  const auto words = normalize_words(text);
  if (words.empty()) throw ValueError("tokenize: caption is empty after normalization");
  Caption c;
  c.ids.reserve(words.size());
  for (const auto& w : words) c.ids.push_back(vocab.id(w));
  return c;
}

std::string detokenize(const Caption& caption, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < caption.ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.token(caption.ids[i]);
  }
  return out;
}

void write_vocab(const Vocabulary& vocab, std::ostream& out) {
  for (const auto& w : vocab.words()) out << w << '\n';
}

Vocabulary read_vocab(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_of(" \t\r") != std::string::npos) {
      throw FormatError("vocabulary line " + std::to_string(line_no) + " is not a single token");
    }
    words.push_back(line);
  }
  try {
    return Vocabulary(words);
  } catch (const ValueError& e) {
    throw FormatError(std::string("vocabulary file: ") + e.what());
  }
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write vocabulary to " + path);
  write_vocab(vocab, out);
  if (!out) throw FormatError("failed writing vocabulary to " + path);
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read vocabulary from " + path);
  return read_vocab(in);
}

}  // namespace textpix
