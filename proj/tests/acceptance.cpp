// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/data/generators.hpp"
#include "srnn/data/metrics.hpp"
#include "srnn/model.hpp"
#include "srnn/model_io.hpp"
#include "srnn/training.hpp"
#include "srnn/verify/enumerate.hpp"
#include "srnn/verify/suites.hpp"

namespace {

using namespace srnn;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << " ("
       << std::fixed;
  line.precision(1);
  line << seconds_since(t0) << " s)";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

ModelConfig vector_config(ModelKind kind, std::size_t labels, std::size_t feature_dim, std::size_t max_seg_len) {
  ModelConfig c;
  c.kind = kind;
  c.input = InputKind::vectors;
  c.feature_dim = feature_dim;
  c.max_seg_len = max_seg_len;
  for (std::size_t y = 0; y < labels; ++y) c.labels.push_back(synthetic_label_name(y, labels));
  return c;
}

Sequence random_input(Rng& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> nd;
  Sequence s;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> v(dim);
    for (double& x : v) x = nd(rng);
    s.vectors.push_back(v);
  }
  return s;
}

// Number of segmentations of n tokens into exactly m parts of size <= L.
std::size_t count_parts(std::size_t n, std::size_t m, std::size_t L) {
  std::size_t c = 0;
  for (const auto& parts : verify::compositions(n, L)) c += parts.size() == m;
  return c;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  verify::OracleConfig cfg;  // |x| <= 6, |Y| <= 3, L in {2, 3, |x|}, 20 seeds
  const auto r = verify::run_oracle_suite(cfg);
  const double secs = seconds_since(t0);
  const bool ok = r.passed(1e-9) && secs < 60.0;
  return {ok, std::to_string(r.cases) + " cases, max |dev| logZ " + fmt(r.log_z, 3) + ", logZ(x,y) " +
                  fmt(r.log_constrained, 3) + ", logZ(x,y,z) " + fmt(r.log_path, 3) + ", map " +
                  fmt(r.map_score, 3) + ", map mismatches " + std::to_string(r.map_mismatches) +
                  " (tol 1e-9, limit 60 s)"};
}

Outcome analytic_partition() {
  double worst = 0.0;
  std::size_t count = 0;
  for (std::size_t L : {std::size_t{3}, std::size_t{0}}) {
    Model m(vector_config(ModelKind::srnn, 2, 3, L));
    for (std::size_t p = 0; p < m.params().size(); ++p)
      for (double& x : m.params()[p].value.data()) x = 0.0;
    Rng rng(7);
    Sequence seq = random_input(rng, 3, 3);
    ad::Graph g;
    SrnnForward fwd(g, m, seq);
    worst = std::max(worst, std::abs(g.scalar(log_partition(*fwd.scorer)) - std::log(18.0)));
    count = verify::enumerate_all(3, 3, 2, [](int, std::size_t, std::size_t) { return 0.0; }).count;
  }
  return {worst <= 1e-12 && count == 18,
          "|log Z - ln 18| = " + fmt(worst, 3) + ", enumerated segmentations " + std::to_string(count)};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  SegmentalConfig sc;
  sc.instances = 10;
  sc.labels = 3;
  sc.durations = {{1, 2}, {1, 3}, {2, 3}};
  sc.sigma = 0.3;
  sc.max_segments = 4;
  const Corpus c = gen_synthetic_segmental(sc, 31);
  bool ok = true;
  std::ostringstream detail;
  for (TrainMode mode : {TrainMode::full, TrainMode::partial, TrainMode::ctc}) {
    Model m(vector_config(model_kind_for(mode), 3, c.feature_dim(), 3));
    m.initialize(32);
    Rng rng = make_stream(33, "gradcheck");
    const auto r = verify::run_gradient_suite(m, c.instances, mode, 2, rng);
    std::size_t min_coords = SIZE_MAX;
    bool spans_all = true;
    for (const auto& inst : r.instances) {
      min_coords = std::min(min_coords, inst.checks.size());
      std::set<std::size_t> tensors;
      for (const auto& ch : inst.checks) tensors.insert(ch.coord.param);
      spans_all = spans_all && tensors.size() == m.params().size();
    }
    const bool pass = r.passed(1e-4) && r.instances.size() == 10 && min_coords >= 10 && spans_all;
    ok = ok && pass;
    detail << to_string(mode) << " max rel " << fmt(r.max_rel_error, 3) << " (" << min_coords << "+ coords x "
           << r.instances.size() << ", " << m.params().size() << " tensors); ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  detail << "tol 1e-4, limit 120 s";
  return {ok, detail.str()};
}

Outcome loss_ordering() {
  Rng rng(41);
  std::size_t violations = 0, degenerate = 0, strict = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t Y = 1 + k % 3;
    const std::size_t n = 1 + (k * 7) % 8;
    const std::size_t L = std::min<std::size_t>(n, 2 + k % 3);
    Model m(vector_config(ModelKind::srnn, Y, 3, L));
    m.initialize(400 + k);
    Sequence seq = random_input(rng, n, 3);
    // random gold
    std::uniform_int_distribution<int> lab(0, static_cast<int>(Y) - 1);
    std::size_t pos = 0;
    while (pos < n) {
      std::uniform_int_distribution<std::size_t> dur(1, std::min(L, n - pos));
      const std::size_t d = dur(rng);
      seq.labels.push_back(lab(rng));
      seq.durations.push_back(d);
      pos += d;
    }
    ad::Graph g;
    const double sup = g.scalar(supervised_loss(g, m, seq));
    const double par = g.scalar(partial_loss(g, m, seq));
    SrnnForward fwd(g, m, seq);
    const double lz = g.scalar(log_partition(*fwd.scorer));
    const double con = g.scalar(log_constrained(*fwd.scorer, seq.labels));
    const double path = g.scalar(log_path_score(*fwd.scorer, seq.gold()));

    if (par < -1e-12 || par > sup + 1e-12 || path > con + 1e-12 || con > lz + 1e-12) ++violations;
    // equality exactly when the sets being summed coincide
    const std::size_t compatible = count_parts(n, seq.labels.size(), L);
    std::size_t total = 0;
    for (std::size_t mm = 1; mm <= n; ++mm) total += count_parts(n, mm, L) * static_cast<std::size_t>(std::pow(Y, mm));
    const bool path_eq = compatible == 1, con_eq = total == compatible;
    if (path_eq != (std::abs(con - path) <= 1e-12)) ++violations;
    if (con_eq != (std::abs(lz - con) <= 1e-12)) ++violations;
    if (path_eq) ++degenerate;
    if (!path_eq) ++strict;
  }
  return {violations == 0, std::to_string(violations) + " violations over 100 instances (" +
                               std::to_string(strict) + " with strict path < constrained, " +
                               std::to_string(degenerate) + " with a unique compatible segmentation)"};
}

Outcome ctc_normalization() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t Y = 1; Y <= 2; ++Y) {
    for (std::size_t T = 1; T <= 5; ++T) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        Model m(vector_config(ModelKind::ctc, Y, 3, 0));
        m.initialize(500 + 10 * s + T, 1.0);
        Rng rng(600 + s * 31 + T * 7 + Y);
        Sequence seq = random_input(rng, T, 3);
        ad::Graph g;
        auto lps = m.head().log_probs(g, m.encoder().encode(g, seq));
        std::vector<double> terms;
        for (const auto& r : verify::all_label_sequences(T, Y, 0)) {
          terms.push_back(g.scalar(ctc_log_marginal(g, lps, r, CtcOutputSpace{Y}.blank())));
        }
        worst = std::max(worst, std::abs(std::exp(log_sum_exp(terms)) - 1.0));
        ++cases;
      }
    }
  }
  return {worst <= 1e-9, "max |sum - 1| = " + fmt(worst, 3) + " over " + std::to_string(cases) + " inputs"};
}

constexpr double train_lr = 0.005;

Outcome overfit() {
  const auto t0 = Clock::now();
  SegmentalConfig sc;
  sc.instances = 50;
  sc.labels = 4;
  sc.durations.assign(4, {1, 4});
  sc.sigma = 0.1;
  const Corpus c = gen_synthetic_segmental(sc, 61);
  Model m(vector_config(ModelKind::srnn, 4, c.feature_dim(), 4));
  m.initialize(62);
  TrainConfig tc;
  tc.lr = train_lr;
  tc.epochs = 50;
  tc.seed = 63;
  const auto r = train(m, c, c, tc);
  const auto metrics = score_predictions(predict_all(m, c), c);
  const double secs = seconds_since(t0);
  const bool ok = metrics.seg->f1 > 0.99 && metrics.tag->f1 > 0.95 && r.history.size() <= 50 && secs < 600;
  return {ok, "training F_seg " + fmt(metrics.seg->f1) + ", F_tag " + fmt(metrics.tag->f1) + " after " +
                  std::to_string(r.history.size()) + " epochs (best " + std::to_string(r.best_epoch) +
                  "); need > 0.99 / > 0.95, limit 600 s"};
}

// Shared by the directional and partial-supervision criteria.
struct Comparison {
  Corpus train, dev, test;
  std::vector<SegMetrics> full, partial, bio, ctc;
  double seconds = 0.0;
};

Comparison& comparison() {
  static Comparison cmp = [] {
    const auto t0 = Clock::now();
    Comparison c;
    SegmentalConfig sc;
    sc.labels = 4;
    sc.durations = {{1, 1}, {2, 3}, {4, 5}, {6, 7}};
    sc.sigma = 0.3;
    sc.instances = 500;
    c.train = gen_synthetic_segmental(sc, 101);
    sc.instances = 50;
    c.dev = gen_synthetic_segmental(sc, 102);
    sc.instances = 200;
    c.test = gen_synthetic_segmental(sc, 103);
    for (std::uint64_t seed : {1, 2, 3}) {
      for (TrainMode mode : {TrainMode::full, TrainMode::partial, TrainMode::bio, TrainMode::ctc}) {
        Model m(vector_config(model_kind_for(mode), 4, c.train.feature_dim(), 8));
        m.initialize(seed);
        TrainConfig tc;
        tc.mode = mode;
        tc.lr = train_lr;
        tc.epochs = 30;
        tc.seed = seed;
        train(m, c.train, c.dev, tc);
        auto metrics = score_predictions(predict_all(m, c.test), c.test);
        switch (mode) {
          case TrainMode::full: c.full.push_back(metrics); break;
          case TrainMode::partial: c.partial.push_back(metrics); break;
          case TrainMode::bio: c.bio.push_back(metrics); break;
          case TrainMode::ctc: c.ctc.push_back(metrics); break;
        }
      }
    }
    c.seconds = seconds_since(t0);
    return c;
  }();
  return cmp;
}

template <class F>
double mean_of(const std::vector<SegMetrics>& v, F get) {
  double s = 0.0;
  for (const auto& m : v) s += get(m);
  return s / static_cast<double>(v.size());
}

Outcome directional() {
  const auto& c = comparison();
  const double srnn_tag = mean_of(c.full, [](const SegMetrics& m) { return m.tag->f1; });
  const double bio_tag = mean_of(c.bio, [](const SegMetrics& m) { return m.tag->f1; });
  const double srnn_err = mean_of(c.full, [](const SegMetrics& m) { return m.error_rate; });
  const double ctc_err = mean_of(c.ctc, [](const SegMetrics& m) { return m.error_rate; });
  const bool ok = srnn_tag > bio_tag && srnn_err < ctc_err && c.seconds < 1800;
  return {ok, "test F_tag SRNN " + fmt(srnn_tag) + " vs BIO " + fmt(bio_tag) + "; error SRNN " + fmt(srnn_err) +
                  " vs CTC " + fmt(ctc_err) + " (3 seeds, 200 test instances, training " +
                  fmt(c.seconds, 3) + " s of 1800)"};
}

Outcome partial_vs_full() {
  const auto& c = comparison();
  const double full = mean_of(c.full, [](const SegMetrics& m) { return m.seg->f1; });
  const double partial = mean_of(c.partial, [](const SegMetrics& m) { return m.seg->f1; });
  return {partial >= full - 0.02,
          "test F_seg partial " + fmt(partial) + " vs full " + fmt(full) + " (gap " +
              fmt(100 * (full - partial), 3) + " points, limit 2)"};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  SegmentalConfig sc;
  sc.instances = 20;
  const Corpus c = gen_synthetic_segmental(sc, 91);
  const fs::path dir = fs::temp_directory_path() / "srnn_acceptance_determinism";
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (std::size_t workers : {std::size_t{1}, std::size_t{4}}) {
    std::vector<std::string> bytes;
    for (int run = 0; run < 2; ++run) {
      Model m(vector_config(ModelKind::srnn, 4, c.feature_dim(), 4));
      m.initialize(92);
      TrainConfig tc;
      tc.lr = train_lr;
      tc.epochs = 3;
      tc.seed = 93;
      tc.workers = workers;
      train(m, c, c, tc);
      const auto path = (dir / ("run" + std::to_string(run) + ".bin")).string();
      save_model(path, m);
      std::ifstream in(path, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      bytes.push_back(ss.str());
    }
    const bool same = bytes[0] == bytes[1] && !bytes[0].empty();
    ok = ok && same;
    detail += std::to_string(workers) + " worker(s): " + (same ? "identical " : "DIFFERENT ") +
              std::to_string(bytes[0].size()) + "-byte files; ";
  }
  fs::remove_all(dir);
  return {ok, detail + "two runs per setting"};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "analytic partition value", analytic_partition);
  report(3, "gradient checks", gradient_checks);
  report(4, "loss ordering", loss_ordering);
  report(5, "CTC normalization", ctc_normalization);
  report(6, "overfit", overfit);
  report(7, "SRNN vs BIO and CTC", directional);
  report(8, "partial vs full supervision", partial_vs_full);
  report(9, "determinism", determinism);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
