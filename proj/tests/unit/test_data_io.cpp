#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "fixtures.hpp"
#include "geometry.hpp"
#include "textpix/dataset.hpp"
#include "textpix/error.hpp"
#include "textpix/idx.hpp"
#include "textpix/manifest.hpp"
#include "textpix/pgm.hpp"
#include "textpix/vocab.hpp"

using namespace textpix;

namespace {

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

std::string idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols, unsigned char fill) {
  return be32(0x803) + be32(count) + be32(rows) + be32(cols) + std::string(count * rows * cols, static_cast<char>(fill));
}

std::string idx_labels(const std::string& labels) { return be32(0x801) + be32(static_cast<std::uint32_t>(labels.size())) + labels; }

ref::ParsedCaption parsed(const std::string& text) {
  auto c = ref::parse_caption(text);
  EXPECT_TRUE(c.has_value()) << text;
  return c.value_or(ref::ParsedCaption{});
}

}  // namespace

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize_value(0.0, 16), 0);
  EXPECT_EQ(quantize_value(1.0, 16), 15);
  EXPECT_EQ(quantize_value(0.49, 2), 0);
  EXPECT_EQ(quantize_value(0.51, 2), 1);
  EXPECT_THROW(quantize_value(-0.01, 4), ValueError);
  EXPECT_THROW(quantize_value(1.01, 4), ValueError);
  EXPECT_THROW(quantize_value(std::nan(""), 4), ValueError);
}

TEST(Quantize, DequantizeRoundTripsEveryLevel) {
  for (std::size_t q = 2; q <= 256; ++q) {
    std::vector<Level> px(q);
    for (std::size_t l = 0; l < q; ++l) px[l] = static_cast<Level>(l);
    ImageGrid g(1, q, q, px);
    Intensities v = dequantize(g);
    for (std::size_t l = 0; l < q; ++l) ASSERT_DOUBLE_EQ(v.values[l], (l + 0.5) / q);
    ASSERT_EQ(quantize(v, q), g) << q;
  }
}

TEST(Quantize, Monotone) {
  Rng rng(1);
  for (int i = 0; i < 5000; ++i) {
    double a = rng.uniform(), b = rng.uniform();
    if (a > b) std::swap(a, b);
    const std::size_t q = 2 + rng.below(255);
    EXPECT_LE(quantize_value(a, q), quantize_value(b, q));
  }
}

TEST(Pgm, HeaderAndPayload) {
  ImageGrid g(2, 2, 4, {0, 1, 2, 3});
  EXPECT_EQ(encode_pgm(g), std::string("P5\n2 2\n3\n\x00\x01\x02\x03", 13));
}

TEST(Pgm, RoundTrips) {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    auto dims = fixture::tiny_dims(2 + rng.below(1023), 1 + rng.below(9), 1 + rng.below(9));
    ImageGrid g = fixture::random_image(dims, rng);
    EXPECT_EQ(decode_pgm(encode_pgm(g), dims.levels), g);
  }
  const auto path = std::filesystem::temp_directory_path() / ("textpix-pgm-" + std::to_string(::getpid()) + ".pgm");
  ImageGrid g(3, 2, 16, {0, 15, 7, 8, 1, 2});
  write_pgm(g, path);
  EXPECT_EQ(read_pgm(path, 16), g);
  std::filesystem::remove(path);
}

TEST(Pgm, MaxvalTwoFiftyFiveKeepsLevels) {
  std::string bytes = "P5\n# comment\n3 1\n255\n";
  bytes += std::string("\x00\x80\xff", 3);
  ImageGrid g = decode_pgm(bytes, 256);
  EXPECT_EQ(g.levels(), 256u);
  EXPECT_EQ(g[0], 0);
  EXPECT_EQ(g[1], 128);
  EXPECT_EQ(g[2], 255);
}

TEST(Pgm, MalformedInputIsRejected) {
  EXPECT_THROW(decode_pgm("P2\n1 1\n1\n\x01"), FormatError);
  EXPECT_THROW(decode_pgm("P5\n0 1\n1\n"), FormatError);
  EXPECT_THROW(decode_pgm(std::string("P5\n2 1\n3\n\x01", 10)), FormatError);
  EXPECT_THROW(decode_pgm(std::string("P5\n1 1\n3\n\x01", 10), 16), FormatError);
  EXPECT_THROW(decode_pgm(std::string("P5\n1 1\n3\n\x05", 10)), FormatError);
  EXPECT_THROW(decode_pgm("P5\n1 1\n"), FormatError);
  EXPECT_THROW(read_pgm("/nonexistent/x.pgm"), FormatError);
}

TEST(Idx, Examples) {
  auto digits = decode_idx(idx_images(1, 28, 28, 255), idx_labels("\x07"));
  ASSERT_EQ(digits.size(), 1u);
  EXPECT_EQ(digits[0].label, 7);
  EXPECT_EQ(digits[0].rows, 28u);
  ASSERT_EQ(digits[0].values.size(), 784u);
  for (double v : digits[0].values) EXPECT_EQ(v, 1.0);

  EXPECT_THROW(decode_idx(idx_images(2, 2, 2, 0), idx_labels("\x01")), FormatError);

  auto half = decode_idx(idx_images(1, 1, 1, 128), idx_labels("\x03"));
  EXPECT_NEAR(half[0].values[0], 0.50196, 1e-5);
  EXPECT_EQ(half[0].values[0], 128.0 / 255.0);
}

TEST(Idx, BadMagicAndTruncation) {
  std::string img = idx_images(1, 2, 2, 9);
  EXPECT_THROW(decode_idx(be32(0x802) + img.substr(4), idx_labels("\x01")), FormatError);
  EXPECT_THROW(decode_idx(img, be32(0x803) + be32(1) + "\x01"), FormatError);
  EXPECT_THROW(decode_idx(img.substr(0, img.size() - 1), idx_labels("\x01")), FormatError);
  EXPECT_THROW(decode_idx(img.substr(0, 10), idx_labels("\x01")), FormatError);
}

TEST(Manifest, RoundTrips) {
  EXPECT_EQ(encode_manifest({}), "");
  EXPECT_TRUE(decode_manifest("").empty());
  std::vector<ManifestEntry> three{{"images/train-0000.pgm", Split::train, "the digit 3 is alone"},
                                   {"images/train-0001.pgm", Split::train, "the digit 1 is on the left of the digit 2"},
                                   {"images/test-0000.pgm", Split::test, "the digit 1 is at the top of the digit 9"}};
  EXPECT_EQ(decode_manifest(encode_manifest(three)), three);
  const auto path = std::filesystem::temp_directory_path() / ("textpix-manifest-" + std::to_string(::getpid()) + ".tsv");
  write_manifest(three, path);
  EXPECT_EQ(read_manifest(path), three);
  std::filesystem::remove(path);
}

TEST(Manifest, DelimiterSafetyAndLineNumbers) {
  EXPECT_THROW(encode_manifest({{"a.pgm", Split::train, "tab\there"}}), ValueError);
  EXPECT_THROW(encode_manifest({{"a.pgm", Split::train, "new\nline"}}), ValueError);
  try {
    decode_manifest("a.pgm\ttrain\tok\nb.pgm\tvalidation\tbad\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(decode_manifest("a.pgm\ttrain\n"), FormatError);
}

TEST(Generator, ConfigErrors) {
  GenConfig c;
  c.canvas = 4;
  c.glyph_width = 5;
  c.glyph_height = 7;
  EXPECT_THROW(c.validate(), ValueError);
  EXPECT_THROW(gen_mnist_captions(c), ValueError);
  GenConfig tight;
  tight.canvas = 9;  // two 5-wide glyphs do not fit side by side
  EXPECT_THROW(tight.validate(), ValueError);
  tight.layout = LayoutMode::single;
  EXPECT_NO_THROW(tight.validate());
}

TEST(Generator, DeterministicAndCounted) {
  GenConfig c;
  auto a = gen_mnist_captions(c), b = gen_mnist_captions(c);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 80u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].split, i < 64 ? Split::train : Split::test);
    EXPECT_EQ(a[i].image.height(), 12u);
    EXPECT_EQ(a[i].image.levels(), 16u);
  }
  c.seed = 8;
  EXPECT_NE(gen_mnist_captions(c), a);
}

TEST(Generator, ExampleCaptionIsBelow) {
  GenConfig c;
  c.train_count = 4000;
  c.test_count = 0;
  bool seen = false;
  for (const auto& ex : gen_mnist_captions(c)) {
    if (ex.caption != "the digit 3 is at the bottom of the digit 0") continue;
    seen = true;
    const auto& d = ex.glyphs[0];
    const auto& e = ex.glyphs[1];
    EXPECT_EQ(d.digit, 3);
    EXPECT_EQ(e.digit, 0);
    EXPECT_GE(d.y, e.y + e.height);
  }
  EXPECT_TRUE(seen);
}

TEST(Generator, EveryExamplePassesTheValidator) {
  GenConfig c;
  c.layout = LayoutMode::mixed;
  c.train_count = 900;
  c.test_count = 100;
  const auto corpus = gen_mnist_captions(c);
  ASSERT_EQ(corpus.size(), 1000u);
  std::vector<std::string> texts;
  std::size_t singles = 0;
  for (const auto& ex : corpus) {
    texts.push_back(ex.caption);
    const ref::ParsedCaption cap = parsed(ex.caption);
    singles += cap.rel == ref::Rel::alone;
    // placement as recorded by the generator: cells inside the canvas and disjoint
    for (const auto& g : ex.glyphs) {
      EXPECT_LE(g.x + g.width, 12u);
      EXPECT_LE(g.y + g.height, 12u);
    }
    if (ex.glyphs.size() == 2) {
      const auto& a = ex.glyphs[0];
      const auto& b = ex.glyphs[1];
      EXPECT_TRUE(a.x + a.width <= b.x || b.x + b.width <= a.x || a.y + a.height <= b.y || b.y + b.height <= a.y);
    }
    // and as read back from the pixels alone
    auto boxes = ref::detect_glyphs(ex.image, cap);
    ASSERT_TRUE(boxes.has_value()) << ex.caption;
    EXPECT_TRUE(ref::relation_holds(cap, *boxes, 12, 12)) << ex.caption;
  }
  EXPECT_GT(singles, 200u);
  EXPECT_LT(singles, 470u);
  const Vocabulary v = build_vocab(texts);
  for (const auto& t : texts)
    for (TokenId id : tokenize(t, v).ids) EXPECT_NE(id, Vocabulary::kUnk);
  for (const auto& w : caption_grammar_words()) EXPECT_TRUE(v.contains(w)) << w;
}

TEST(Generator, DigitsAreRoughlyUniform) {
  GenConfig c;
  c.train_count = 2000;
  c.test_count = 0;
  std::vector<int> counts(10, 0);
  for (const auto& ex : gen_mnist_captions(c))
    for (const auto& g : ex.glyphs) ++counts[g.digit];
  for (int n : counts) EXPECT_NEAR(n, 400, 80);
}

TEST(Generator, IdxGlyphSource) {
  const auto dir = std::filesystem::temp_directory_path() / ("textpix-idx-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string images = be32(0x803) + be32(10) + be32(4) + be32(4);
  std::string labels;
  for (int d = 0; d < 10; ++d) {
    images += std::string(16, static_cast<char>(d == 0 ? 0 : 255));
    labels += static_cast<char>(d);
  }
  std::ofstream(dir / "img.idx", std::ios::binary) << images;
  std::ofstream(dir / "lab.idx", std::ios::binary) << idx_labels(labels);
  GenConfig c;
  c.idx_images = (dir / "img.idx").string();
  c.idx_labels = (dir / "lab.idx").string();
  c.layout = LayoutMode::single;
  c.train_count = 20;
  c.test_count = 0;
  for (const auto& ex : gen_mnist_captions(c)) {
    const auto& g = ex.glyphs[0];
    std::size_t inked = 0;
    for (std::size_t r = 0; r < ex.image.height(); ++r)
      for (std::size_t q = 0; q < ex.image.width(); ++q) inked += ex.image.at(r, q) == 15;
    EXPECT_EQ(inked, g.digit == 0 ? 0u : 25u) << ex.caption;
  }
  std::filesystem::remove_all(dir);
}
