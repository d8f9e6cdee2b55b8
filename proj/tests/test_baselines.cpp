#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "srnn/baselines.hpp"
#include "srnn/gradcheck.hpp"
#include "srnn/model.hpp"
#include "srnn/verify/enumerate.hpp"
#include "test_util.hpp"

namespace {

using namespace srnn;
using srnn::testing::random_vectors;
using srnn::testing::small_config;

constexpr int N = 0, V = 1;

TEST(Bio, ConvertsTagsToSegments) {
  std::vector<int> tags{BioTagSet::begin(N), BioTagSet::inside(N), BioTagSet::begin(V)};
  auto seg = bio_to_segments(tags);
  ASSERT_EQ(seg.size(), 2u);
  EXPECT_EQ(seg.segments[0], (Segment{0, 2, N}));
  EXPECT_EQ(seg.segments[1], (Segment{2, 1, V}));
}

TEST(Bio, OrphanInsideOpensSegment) {
  std::vector<int> lone{BioTagSet::inside(N)};
  auto seg = bio_to_segments(lone);
  ASSERT_EQ(seg.size(), 1u);
  EXPECT_EQ(seg.segments[0], (Segment{0, 1, N}));

  std::vector<int> switched{BioTagSet::begin(N), BioTagSet::inside(V), BioTagSet::inside(V)};
  auto s2 = bio_to_segments(switched);
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(s2.segments[1], (Segment{1, 2, V}));
}

TEST(Bio, RoundTripsEverySegmentation) {
  for (std::size_t n = 1; n <= 6; ++n) {
    verify::for_each_labeled_segmentation(n, n, 2, [&](const LabeledSegmentation& seg) {
      auto tags = segments_to_bio(seg);
      ASSERT_EQ(tags.size(), n);
      EXPECT_EQ(bio_to_segments(tags).segments, seg.segments);
    });
  }
}

TEST(Bio, LossIsNegatedSumOfPickedLogProbs) {
  Model m(small_config(ModelKind::bio, 2));
  m.initialize(1, 0.5);
  Rng rng(2);
  auto seq = random_vectors(rng, 4, 3);
  std::vector<int> tags{0, 1, 2, 3};
  ad::Graph g;
  auto ctx = m.encoder().encode(g, seq);
  auto lps = m.head().log_probs(g, ctx);
  double expected = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    auto v = g.value(lps[t]);
    double total = 0.0;
    for (double x : v) total += std::exp(x);
    EXPECT_NEAR(total, 1.0, 1e-12);
    expected -= v[tags[t]];
  }
  EXPECT_NEAR(g.scalar(bio_loss(g, m.head(), ctx, tags)), expected, 1e-12);
  EXPECT_THROW(bio_loss(g, m.head(), ctx, std::vector<int>{0}), ValidationError);
}

TEST(Bio, GradientsMatchFiniteDifferences) {
  Model m(small_config(ModelKind::bio, 2));
  m.initialize(3, 0.5);
  Rng rng(4);
  auto seq = random_vectors(rng, 4, 3);
  std::vector<int> tags{0, 1, 3, 2};
  auto build = [&](ad::Graph& g) { return bio_loss(g, m.head(), m.encoder().encode(g, seq), tags); };
  auto coords = sample_coordinates(m.params(), 4, rng);
  auto r = check_gradients(m.params(), build, coords);
  EXPECT_TRUE(r.passed(1e-4)) << r.max_rel_error;
}

TEST(Argmax, TiesGoToLowerIndex) {
  std::vector<double> v{0.5, 1.0, 1.0};
  EXPECT_EQ(argmax(v), 1u);
}

// --- CTC --------------------------------------------------------------------

std::vector<ad::Expr> frames(ad::Graph& g, const std::vector<std::vector<double>>& probs) {
  std::vector<ad::Expr> out;
  for (const auto& p : probs) {
    std::vector<double> lp;
    for (double x : p) lp.push_back(std::log(x));
    out.push_back(g.input(lp));
  }
  return out;
}

TEST(Ctc, InterpretationDropsBlanksKeepsRepeats) {
  const int a = 0, blank = 2;
  EXPECT_EQ(ctc_interpret(std::vector<int>{a, blank, a}, blank), (std::vector<int>{a, a}));
  EXPECT_EQ(ctc_interpret(std::vector<int>{a, a}, blank), (std::vector<int>{a, a}));
  EXPECT_TRUE(ctc_interpret(std::vector<int>{blank, blank}, blank).empty());
}

TEST(Ctc, HandComputedMarginals) {
  ad::Graph g;
  // labels {a, b}, blank = 2
  auto one = frames(g, {{0.6, 0.1, 0.3}});
  EXPECT_NEAR(g.scalar(ctc_log_marginal(g, one, std::vector<int>{0}, 2)), std::log(0.6), 1e-15);
  auto two = frames(g, {{0.6, 0.1, 0.3}, {0.2, 0.5, 0.3}});
  // "aa" over two frames has only the path a a
  EXPECT_NEAR(g.scalar(ctc_log_marginal(g, two, std::vector<int>{0, 0}, 2)),
              std::log(0.6 * 0.2), 1e-15);
  // "a": a-blank or blank-a
  EXPECT_NEAR(g.scalar(ctc_log_marginal(g, two, std::vector<int>{0}, 2)),
              std::log(0.6 * 0.3 + 0.3 * 0.2), 1e-15);
  // empty reading: all blank
  EXPECT_NEAR(g.scalar(ctc_log_marginal(g, two, std::vector<int>{}, 2)), std::log(0.3 * 0.3),
              1e-15);
  const double too_long = g.scalar(ctc_log_marginal(g, two, std::vector<int>{0, 1, 0}, 2));
  EXPECT_TRUE(std::isinf(too_long) && too_long < 0);
}

TEST(Ctc, LatticeMatchesBruteForceAndNormalizes) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (std::size_t T = 1; T <= 5; ++T) {
    const std::size_t S = 3;  // two labels and blank
    std::vector<std::vector<double>> probs(T, std::vector<double>(S));
    std::vector<std::vector<double>> lps(T, std::vector<double>(S));
    for (std::size_t t = 0; t < T; ++t) {
      double z = 0;
      for (double& p : probs[t]) z += (p = u(rng));
      for (std::size_t s = 0; s < S; ++s) lps[t][s] = std::log(probs[t][s] / z);
    }
    ad::Graph g;
    std::vector<ad::Expr> nodes;
    for (const auto& lp : lps) nodes.push_back(g.input(lp));
    std::vector<double> all;
    for (const auto& r : verify::all_label_sequences(T, 2, 0)) {
      const double lattice = g.scalar(ctc_log_marginal(g, nodes, r, 2));
      const double brute = verify::enumerate_ctc(lps, r, 2);
      EXPECT_NEAR(lattice, brute, 1e-12);
      all.push_back(lattice);
    }
    EXPECT_NEAR(std::exp(log_sum_exp(all)), 1.0, 1e-9);
  }
}

TEST(Ctc, BestPathDecoding) {
  ad::Graph g;
  auto f = frames(g, {{0.7, 0.1, 0.2}, {0.1, 0.2, 0.7}, {0.6, 0.3, 0.1}, {0.5, 0.4, 0.1}});
  EXPECT_EQ(ctc_best_path_decode(g, f, 2), (std::vector<int>{0, 0, 0}));
}

TEST(Ctc, GradientsMatchFiniteDifferences) {
  Model m(small_config(ModelKind::ctc, 2));
  m.initialize(6, 0.5);
  Rng rng(7);
  auto seq = random_vectors(rng, 5, 3);
  std::vector<int> ref{1, 0, 0};
  auto build = [&](ad::Graph& g) {
    auto lps = m.head().log_probs(g, m.encoder().encode(g, seq));
    return -ctc_log_marginal(g, lps, ref, 2);
  };
  auto coords = sample_coordinates(m.params(), 4, rng);
  auto r = check_gradients(m.params(), build, coords);
  EXPECT_TRUE(r.passed(1e-4)) << r.max_rel_error;
}

}  // namespace
