#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "textpix/decoder.hpp"
#include "textpix/manifest.hpp"
#include "textpix/vocab.hpp"

namespace textpix::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// A gen-data output directory: manifest.tsv, vocab.txt and images/.
struct Corpus {
  Vocabulary vocab;
  std::vector<ManifestEntry> entries;
  std::vector<ImageGrid> images;  // aligned with entries
};

Corpus load_corpus(const std::filesystem::path& dir);
// Items of one split, captions tokenized with `vocab`.
std::vector<TrainingPair> split_pairs(const Corpus& corpus, Split split, const Vocabulary& vocab);

}  // namespace textpix::cli
