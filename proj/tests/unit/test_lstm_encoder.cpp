#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "reference_model.hpp"
#include "textpix/dataset.hpp"
#include "textpix/encoder.hpp"
#include "textpix/error.hpp"
#include "textpix/grad_check.hpp"
#include "textpix/vocab.hpp"

using namespace textpix;

TEST(Vocab, FrequencyOrder) {
  Vocabulary v = build_vocab({"a a b"});
  EXPECT_EQ(v.size(), 6u);
  EXPECT_LT(v.id("a"), v.id("b"));
  EXPECT_EQ(v.id("a"), Vocabulary::kFirstWord);
}

TEST(Vocab, TiesAreLexicographic) {
  Vocabulary v = build_vocab({"c b a", "b c a"});
  EXPECT_EQ(v.words(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Vocab, MinCountThreshold) {
  Vocabulary v = build_vocab({"x"}, 2);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(tokenize("x", v).ids, (std::vector<TokenId>{Vocabulary::kUnk}));
}

TEST(Vocab, EmptyCorpusIsRejected) { EXPECT_THROW(build_vocab({}), ValueError); }

TEST(Vocab, SpecialsAreFixed) {
  Vocabulary v = build_vocab({"hello"});
  EXPECT_EQ(Vocabulary::kPad, 0u);
  EXPECT_EQ(Vocabulary::kBos, 1u);
  EXPECT_EQ(Vocabulary::kEos, 2u);
  EXPECT_EQ(Vocabulary::kUnk, 3u);
  for (TokenId a = 0; a < Vocabulary::kFirstWord; ++a)
    for (TokenId b = a + 1; b < Vocabulary::kFirstWord; ++b) EXPECT_NE(v.token(a), v.token(b));
  for (TokenId id = Vocabulary::kFirstWord; id < v.size(); ++id) EXPECT_EQ(v.id(v.token(id)), id) << v.token(id);
}

TEST(Vocab, CaptionCorpusCoversTheGrammar) {
  GenConfig cfg;
  cfg.layout = LayoutMode::mixed;
  cfg.train_count = 200;
  cfg.test_count = 0;
  std::vector<std::string> corpus;
  for (const auto& ex : gen_mnist_captions(cfg)) corpus.push_back(ex.caption);
  Vocabulary v = build_vocab(corpus);
  for (const char* w : {"the", "digit", "is", "at", "on", "bottom", "top", "left", "right", "of", "0", "1", "2", "3",
                        "4", "5", "6", "7", "8", "9"}) {
    EXPECT_TRUE(v.contains(w)) << w;
  }
}

TEST(Vocab, FileRoundTrip) {
  Vocabulary v = build_vocab({"the digit 3 is alone", "the digit 4 is on the left of the digit 3"});
  std::stringstream s;
  write_vocab(v, s);
  EXPECT_EQ(read_vocab(s), v);
  std::stringstream bad("two words\n");
  EXPECT_THROW(read_vocab(bad), FormatError);
}

TEST(Tokenize, Examples) {
  Vocabulary v = build_vocab({"the digit 3 is at the bottom of the digit 0"});
  Caption c = tokenize("The digit 3", v);
  EXPECT_EQ(c.ids, (std::vector<TokenId>{v.id("the"), v.id("digit"), v.id("3")}));
  EXPECT_EQ(tokenize("zzz-unknown", v).ids, (std::vector<TokenId>{Vocabulary::kUnk}));
  Vocabulary ab = build_vocab({"a b"});
  EXPECT_EQ(tokenize("A  B", ab).length(), 2u);
  EXPECT_THROW(tokenize(" ?! ", v), ValueError);
}

TEST(Tokenize, DetokenizeRoundTrip) {
  Vocabulary v = build_vocab({"the digit 3 is at the bottom of the digit 0", "the digit 7 is alone"});
  for (const char* text : {"the digit 7 is alone", "the digit 0 is at the bottom of the digit 3"}) {
    Caption c = tokenize(text, v);
    EXPECT_EQ(detokenize(c, v), text);
    EXPECT_EQ(tokenize(detokenize(c, v), v), c);
  }
}

namespace {

Tensor annotations_of(const ModelParams& p, const Caption& c) {
  Tape tape;
  BoundModel m = bind_model(tape, p, false);
  return encode_caption(c, m).rows.value();
}

}  // namespace

TEST(Encoder, SingleWordShape) {
  auto dims = fixture::tiny_dims();
  Tensor a = annotations_of(fixture::random_model(dims, 1), Caption{{5}});
  EXPECT_EQ(a.shape(), (Shape{1, 2 * dims.encoder_width}));
}

TEST(Encoder, ZeroWeightsGiveZeroAnnotations) {
  auto dims = fixture::tiny_dims();
  const Tensor a = annotations_of(zero_model(dims), Caption{{4, 5, 6}});
  for (double x : a.data()) EXPECT_EQ(x, 0.0);
}

TEST(Encoder, RejectsOutOfRangeIds) {
  auto dims = fixture::tiny_dims();
  auto p = fixture::random_model(dims, 1);
  EXPECT_THROW(annotations_of(p, Caption{{4, static_cast<TokenId>(dims.vocab_size)}}), ValueError);
  EXPECT_THROW(annotations_of(p, Caption{}), ValueError);
}

TEST(Encoder, MatchesReference) {
  auto dims = fixture::tiny_dims();
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = fixture::random_model(dims, 10 + trial);
    Caption c = fixture::random_caption(dims, rng, 5);
    Tensor a = annotations_of(p, c);
    auto rows = ref::annotations(p, c);
    ASSERT_EQ(a.shape()[0], c.length());
    for (std::size_t i = 0; i < c.length(); ++i)
      for (std::size_t k = 0; k < a.shape()[1]; ++k) {
        EXPECT_NEAR(a.at(i, k), rows[i][k], 1e-13);
        EXPECT_GT(a.at(i, k), -1.0);
        EXPECT_LT(a.at(i, k), 1.0);
      }
  }
}

namespace {

// Copies the forward direction's weights over the backward direction's, or swaps them.
void tie_or_swap(ModelParams& p, bool swap) {
  auto& L = p.layout;
  const std::pair<std::size_t, std::size_t> pairs[] = {{L.encoder_forward.w_is, L.encoder_backward.w_is},
                                                       {L.encoder_forward.w_ss, L.encoder_backward.w_ss},
                                                       {L.encoder_forward.bias, L.encoder_backward.bias}};
  for (auto [f, b] : pairs) {
    if (swap) std::swap(p.tensors[f], p.tensors[b]);
    else p.tensors[b] = p.tensors[f];
  }
}

}  // namespace

TEST(Encoder, PalindromeWithTiedDirections) {
  auto dims = fixture::tiny_dims();
  auto p = fixture::random_model(dims, 3);
  tie_or_swap(p, false);
  Caption c{{4, 6, 5, 6, 4}};
  Tensor a = annotations_of(p, c);
  const std::size_t m = dims.encoder_width, n = c.length();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) EXPECT_EQ(a.at(i, k), a.at(n - 1 - i, m + k));
}

TEST(Encoder, ReversalSwapsDirections) {
  auto dims = fixture::tiny_dims();
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = fixture::random_model(dims, 20 + trial);
    Caption c = fixture::random_caption(dims, rng, 6);
    Caption r{{c.ids.rbegin(), c.ids.rend()}};
    auto q = p;
    tie_or_swap(q, true);
    Tensor a = annotations_of(p, c);
    Tensor b = annotations_of(q, r);
    const std::size_t m = dims.encoder_width, n = c.length();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        EXPECT_EQ(a.at(i, k), b.at(n - 1 - i, m + k));
        EXPECT_EQ(a.at(i, m + k), b.at(n - 1 - i, k));
      }
  }
}

TEST(Encoder, GradientMatchesFiniteDifferences) {
  auto dims = fixture::tiny_dims();
  dims.encoder_width = 3;
  auto p = fixture::random_model(dims, 5, 0.8);
  const Caption c{{4, 7}};
  Rng rng(6);
  Tensor readout({2, 6});
  for (auto& v : readout.data()) v = rng.uniform(-1, 1);
  ParamSet enc;
  const auto& L = p.layout;
  for (std::size_t idx : {L.word_embedding, L.encoder_forward.w_is, L.encoder_forward.w_ss, L.encoder_forward.bias,
                          L.encoder_backward.w_is, L.encoder_backward.w_ss, L.encoder_backward.bias}) {
    enc.add(p.tensors.name(idx), p.tensors[idx]);
  }
  auto r = grad_check(
      [&](Tape& tape, const std::vector<Var>& v) {
        Annotations a = encode_words(tape, c, v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]});
        Var rows = a.rows;
        Var w = tape.constant(readout);
        Var total;
        for (std::size_t i = 0; i < 2; ++i) {
          Var term = sum(mul(embed_lookup(rows, i), embed_lookup(w, i)));
          total = total.valid() ? add(total, term) : term;
        }
        return total;
      },
      enc);
  EXPECT_LT(r.max_relative_error, 1e-4) << describe(r, enc);
}
