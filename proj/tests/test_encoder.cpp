#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "srnn/encoder.hpp"
#include "srnn/gradcheck.hpp"
#include "srnn/verify/reference.hpp"
#include "test_util.hpp"

namespace {

using namespace srnn;
using srnn::testing::random_vectors;
using srnn::testing::set_all;

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

void randomize(ad::ParameterCollection& pc, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t p = 0; p < pc.size(); ++p)
    for (double& x : pc[p].value.data()) x = u(rng);
}

TEST(Encoder, ZeroParametersGiveZeroContext) {
  ad::ParameterCollection pc;
  auto enc = InputEncoder::create(pc, InputKind::vectors, {.feature_dim = 3, .context_dim = 24});
  set_all(pc, 0.0);
  Rng rng(1);
  auto seq = random_vectors(rng, 5, 3);
  ad::Graph g;
  auto ctx = enc.encode(g, seq);
  ASSERT_EQ(ctx.size(), 5u);
  for (auto c : ctx.c) {
    ASSERT_EQ(g.size(c), 24u);
    for (double v : g.value(c)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Encoder, LengthOneIsOneStepEachWay) {
  ad::ParameterCollection pc;
  auto bi = BiLstm::create(pc, "ctx", 3, 4);
  randomize(pc, 2);
  ad::Graph g;
  auto x = g.input({0.3, -0.2, 0.9});
  std::vector<ad::Expr> xs{x};
  auto ctx = encode_context(g, bi, xs);
  auto f = lstm_step(g, bi.fwd, std::nullopt, x).h;
  auto b = lstm_step(g, bi.bwd, std::nullopt, x).h;
  auto expected = to_vec(g.value(f));
  auto tail = to_vec(g.value(b));
  expected.insert(expected.end(), tail.begin(), tail.end());
  EXPECT_EQ(to_vec(g.value(ctx[0])), expected);
}

TEST(Encoder, ContextSeesBothDirections) {
  ad::ParameterCollection pc;
  auto enc = InputEncoder::create(pc, InputKind::vectors, {.feature_dim = 2, .context_dim = 8});
  randomize(pc, 3);
  Rng rng(4);
  auto seq = random_vectors(rng, 3, 2);
  ad::Graph g1;
  auto c1 = to_vec(g1.value(enc.encode(g1, seq)[2]));
  seq.vectors[0][0] += 0.5;
  ad::Graph g2;
  auto c2 = to_vec(g2.value(enc.encode(g2, seq)[2]));
  // forward half of c_3 reads token 1 through the recurrence
  bool changed = false;
  for (std::size_t k = 0; k < 4; ++k) changed = changed || c1[k] != c2[k];
  EXPECT_TRUE(changed);
  // and the reverse direction of c_1 reads token 3
  ad::Graph g3;
  auto before = to_vec(g3.value(enc.encode(g3, seq)[0]));
  seq.vectors[2][1] -= 0.7;
  ad::Graph g4;
  auto after = to_vec(g4.value(enc.encode(g4, seq)[0]));
  bool changed_back = false;
  for (std::size_t k = 4; k < 8; ++k) changed_back = changed_back || before[k] != after[k];
  EXPECT_TRUE(changed_back);
}

TEST(Encoder, EmptyInputRejected) {
  ad::ParameterCollection pc;
  auto bi = BiLstm::create(pc, "ctx", 3, 4);
  ad::Graph g;
  EXPECT_THROW(encode_context(g, bi, {}), ValidationError);
}

TEST(Encoder, TapeMatchesPlainReference) {
  ad::ParameterCollection pc;
  auto enc = InputEncoder::create(pc, InputKind::vectors, {.feature_dim = 3, .context_dim = 10});
  randomize(pc, 5, 0.8);
  Rng rng(6);
  for (std::size_t n = 1; n <= 6; ++n) {
    auto seq = random_vectors(rng, n, 3);
    ad::Graph g;
    auto ctx = enc.encode(g, seq);
    auto ref = verify::ref_context(enc.context, seq.vectors);
    for (std::size_t t = 0; t < n; ++t) {
      auto v = g.value(ctx[t]);
      for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], ref[t][k], 1e-13);
    }
  }
}

TEST(Encoder, ContextGradientsMatchFiniteDifferences) {
  ad::ParameterCollection pc;
  auto enc = InputEncoder::create(pc, InputKind::vectors, {.feature_dim = 3, .context_dim = 6});
  Rng rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    randomize(pc, 100 + trial, 0.7);
    auto seq = random_vectors(rng, 4, 3);
    std::vector<double> probe(6);
    std::normal_distribution<double> nd;
    for (double& p : probe) p = nd(rng);
    auto build = [&](ad::Graph& g) {
      auto ctx = enc.encode(g, seq);
      std::vector<ad::Expr> parts;
      for (auto c : ctx.c) parts.push_back(ad::dot(ad::tanh(c), g.input(probe)));
      return ad::sum(parts);
    };
    auto coords = sample_coordinates(pc, 4, rng);
    auto report = check_gradients(pc, build, coords);
    EXPECT_TRUE(report.passed(1e-4)) << report.max_rel_error;
  }
}

// --- strokes --------------------------------------------------------------

TEST(Strokes, PointFeaturesNormalizedWithZeroFirstDelta) {
  std::vector<Stroke> word{{{10.0, 20.0}, {14.0, 22.0}, {18.0, 20.0}}, {{30.0, 25.0}, {31.0, 40.0}}};
  auto feats = stroke_point_features(word);
  ASSERT_EQ(feats.size(), 2u);
  for (const auto& stroke : feats) {
    EXPECT_EQ(stroke[0][2], 0.0);
    EXPECT_EQ(stroke[0][3], 0.0);
    for (const auto& p : stroke) {
      EXPECT_GE(p[0], 0.0);
      EXPECT_LE(p[0], 1.0);
      EXPECT_GE(p[1], 0.0);
      EXPECT_LE(p[1], 1.0);
    }
  }
  // range 21 along x; the second point moved (4, 2)
  EXPECT_NEAR(feats[0][1][2], 4.0 / 21.0, 1e-15);
  EXPECT_NEAR(feats[0][1][3], 2.0 / 21.0, 1e-15);
}

TEST(Strokes, ZeroParametersGiveZeroEmbedding) {
  ad::ParameterCollection pc;
  auto bi = BiLstm::create(pc, "stroke", 4, 5);
  ad::Graph g;
  std::vector<PointFeature> pts{{0.1, 0.2, 0.0, 0.0}, {0.3, 0.1, 0.2, -0.1}};
  auto e = embed_stroke(g, bi, pts);
  ASSERT_EQ(g.size(e), 10u);
  for (double v : g.value(e)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(embed_stroke(g, bi, {}), ValidationError);
}

TEST(Strokes, SinglePointIsOneStepEachWay) {
  ad::ParameterCollection pc;
  auto bi = BiLstm::create(pc, "stroke", 4, 5);
  randomize(pc, 8);
  ad::Graph g;
  std::vector<PointFeature> pts{{0.4, 0.6, 0.0, 0.0}};
  auto e = to_vec(g.value(embed_stroke(g, bi, pts)));
  auto x = g.input(std::span<const double>(pts[0]));
  auto f = to_vec(g.value(lstm_step(g, bi.fwd, std::nullopt, x).h));
  auto b = to_vec(g.value(lstm_step(g, bi.bwd, std::nullopt, x).h));
  f.insert(f.end(), b.begin(), b.end());
  EXPECT_EQ(e, f);
}

TEST(Strokes, ReversalSwapsHalvesWhenDirectionsSwap) {
  ad::ParameterCollection pc;
  auto bi = BiLstm::create(pc, "stroke", 4, 5);
  randomize(pc, 9);
  BiLstm swapped{bi.bwd, bi.fwd};
  std::vector<PointFeature> pts{{0.1, 0.2, 0, 0}, {0.5, 0.3, 0.4, 0.1}, {0.9, 0.8, 0.4, 0.5}};
  std::vector<PointFeature> rev(pts.rbegin(), pts.rend());
  ad::Graph g;
  auto a = to_vec(g.value(embed_stroke(g, bi, pts)));
  auto b = to_vec(g.value(embed_stroke(g, swapped, rev)));
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a[k], b[k + 5]);
    EXPECT_EQ(a[k + 5], b[k]);
  }
  // with the original parameters, reversal changes the result
  auto c = to_vec(g.value(embed_stroke(g, bi, rev)));
  EXPECT_NE(a, c);
}

// --- symbols ----------------------------------------------------------------

TEST(Symbols, LookupAndUnknownFallback) {
  ad::ParameterCollection pc;
  Vocabulary vocab;
  vocab.add("a");
  vocab.add("b");
  auto enc = InputEncoder::create(pc, InputKind::symbols, {.embed_dim = 64, .context_dim = 24}, vocab);
  randomize(pc, 10);
  ad::Graph g;
  auto xs = embed_symbols(g, *enc.embeddings, enc.vocab, {"b", "zzz"});
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_EQ(g.size(xs[0]), 64u);
  const auto& table = enc.embeddings->value;
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(g.value(xs[0])[k], table.at(2, k));
    EXPECT_EQ(g.value(xs[1])[k], table.at(0, k));
  }
}

TEST(Symbols, PretrainedFormat) {
  Vocabulary vocab;
  vocab.add("x");
  ad::ParameterCollection pc;
  auto& table = pc.add("t", {vocab.size(), 3});
  std::istringstream in("x 0.5 -1 2\ny 1 1 1\n\n");
  auto entries = read_pretrained(in, 3);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(apply_pretrained(table, vocab, entries), 1u);
  EXPECT_EQ(table.value.at(1, 0), 0.5);
  EXPECT_EQ(table.value.at(1, 2), 2.0);

  std::istringstream bad("x 1 2 3\ny 1 2\n");
  try {
    read_pretrained(bad, 3);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
