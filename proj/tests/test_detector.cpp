#include <gtest/gtest.h>

#include "covcpd/detector.hpp"
#include "covcpd/errors.hpp"
#include "covcpd/io.hpp"
#include "covcpd/simlab.hpp"
#include "oracles.hpp"

using namespace covcpd;

namespace {

DetectorConfig quick_config() {
  DetectorConfig config;
  config.null_mc.replicates = 1000;
  config.null_mc.grid = 250;
  config.null_mc.threads = 1;
  return config;
}

const std::vector<double> kHigh{1, 1, 1, 1, .5, .5, .5, .5};
const std::vector<double> kLow{.5, .5, .5, .5, 1, 1, 1, 1};

}  // namespace

TEST(Detect, IdenticalCurvesNeverReject) {
  CurvePanel panel;
  panel.basis = BasisSpec::band(2, 8);
  panel.coeffs = RowMatrix::Constant(60, 8, 0.4);
  const TestResult r = detect_and_test(panel, quick_config());
  EXPECT_EQ(r.t_max, 0.0);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.spectrum.d_kept, 0);
}

TEST(Detect, FindsBreakInSettingOne) {
  int hits = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const CurvePanel panel = generate_panel(builtin_setting(1, 0.0, 300), panel_seed(5, 300, static_cast<int>(rep)));
    DetectorConfig config = quick_config();
    config.null_mc.seed = 100 + rep;
    const TestResult r = detect_and_test(panel, config);
    EXPECT_EQ(r.n, 600);
    EXPECT_EQ(r.bandwidth, 9);
    if (r.reject && r.theta_hat > 0.497 && r.theta_hat < 0.503) ++hits;
  }
  EXPECT_GE(hits, 18);
}

TEST(Detect, DecisionRule) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CurvePanel panel = oracle::gaussian_panel(80, 3, seed);
    DetectorConfig config = quick_config();
    config.min_segment = 8;
    config.null_mc.seed = seed;
    const TestResult r = detect_and_test(panel, config);
    EXPECT_EQ(r.reject, r.t_max > r.crit);
    if (r.p <= config.alpha) EXPECT_TRUE(r.reject);
    EXPECT_EQ(r.null_seed, seed);
  }
}

TEST(Detect, ScalingLeavesDecisionUnchanged) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CurvePanel panel = oracle::regime_panel({40, 40}, kHigh, seed % 2 == 0 ? kLow : kHigh, seed);
    const TestResult base = detect_and_test(panel, quick_config());
    for (double c : {0.1, 10.0}) {
      CurvePanel scaled = panel;
      scaled.coeffs *= c;
      const TestResult r = detect_and_test(scaled, quick_config());
      EXPECT_EQ(r.reject, base.reject);
      EXPECT_EQ(r.k_hat, base.k_hat);
      EXPECT_EQ(r.p, base.p);
      EXPECT_NEAR(r.t_max, std::pow(c, 4) * base.t_max, 1e-10 * std::pow(c, 4) * base.t_max);
    }
  }
}

TEST(Detect, ThreadCountDoesNotChangeResult) {
  const CurvePanel panel = oracle::regime_panel({50, 70}, kHigh, kLow, 3);
  DetectorConfig config = quick_config();
  config.null_mc.threads = 1;
  const TestResult one = detect_and_test(panel, config);
  config.null_mc.threads = 8;
  const TestResult eight = detect_and_test(panel, config);
  EXPECT_EQ(to_json(one).dump(), to_json(eight).dump());
}

TEST(Detect, PreprocessingOrder) {
  CurvePanel panel = oracle::gaussian_panel(40, 4, 6);
  panel.coeffs.array() += 2.0;
  DetectorConfig config = quick_config();
  config.demean = true;
  config.rescale = true;
  const CurvePanel out = preprocess(panel, config);
  EXPECT_TRUE(out.demeaned);
  EXPECT_TRUE(out.rescaled);
  for (Eigen::Index i = 0; i < out.n(); ++i) EXPECT_NEAR(out.coeffs.row(i).norm(), 1.0, 1e-12);
  EXPECT_EQ(out.coeffs, rescale_unit_norm(demean_curves(panel)).coeffs);
}

TEST(Detect, InputErrors) {
  const CurvePanel panel = oracle::gaussian_panel(20, 8, 1, BasisSpec::band(2, 8));
  EXPECT_THROW(detect_and_test(panel, quick_config()), SegmentTooShort);
  DetectorConfig config = quick_config();
  config.min_segment = 10;  // below 2 (p + 1) = 18
  EXPECT_THROW(detect_and_test(panel, config), ArgumentError);
  config = quick_config();
  config.alpha = 1.0;
  EXPECT_THROW(detect_and_test(oracle::gaussian_panel(60, 8, 1), config), ArgumentError);
}

TEST(Segment, NoBreak) {
  const CurvePanel panel = oracle::regime_panel({200}, kHigh, kHigh, 4);
  DetectorConfig config = quick_config();
  config.alpha = 0.01;
  const SegmentTree tree = binary_segment(panel, config);
  EXPECT_TRUE(tree.change_points.empty());
  ASSERT_EQ(tree.nodes.size(), 1u);
  ASSERT_TRUE(tree.nodes[0].test.has_value());
  EXPECT_FALSE(tree.nodes[0].test->reject);
  EXPECT_EQ(tree.nodes[0].stop, StopReason::not_significant);
}

TEST(Segment, ShortPanel) {
  const CurvePanel panel = oracle::regime_panel({20}, kHigh, kHigh, 4);
  const SegmentTree tree = binary_segment(panel, quick_config());
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(tree.nodes[0].stop, StopReason::too_short);
  EXPECT_FALSE(tree.nodes[0].test.has_value());
}

TEST(Segment, TreeInvariantsAndReproducibility) {
  const CurvePanel panel = oracle::regime_panel({150, 150, 150}, kHigh, kLow, 8);
  DetectorConfig config = quick_config();
  const SegmentTree a = binary_segment(panel, config);
  config.null_mc.threads = 4;
  const SegmentTree b = binary_segment(panel, config);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_TRUE(std::is_sorted(a.change_points.begin(), a.change_points.end()));
  for (const auto& node : a.nodes) {
    if (node.change_point) {
      EXPECT_GE(*node.change_point - node.begin, config.min_segment);
      EXPECT_GE(node.end - *node.change_point, config.min_segment);
      ASSERT_GE(node.left, 0);
      ASSERT_GE(node.right, 0);
      EXPECT_EQ(a.nodes[static_cast<std::size_t>(node.left)].end, *node.change_point);
      EXPECT_EQ(a.nodes[static_cast<std::size_t>(node.right)].begin, *node.change_point);
    } else {
      const bool quiet = node.test.has_value() && !node.test->reject;
      EXPECT_TRUE(quiet || node.stop != StopReason::not_significant);
    }
  }
}

TEST(Segment, DepthCap) {
  const CurvePanel panel = oracle::regime_panel({150, 150, 150}, kHigh, kLow, 8);
  DetectorConfig config = quick_config();
  config.max_depth = 1;
  const SegmentTree tree = binary_segment(panel, config);
  EXPECT_LE(tree.change_points.size(), 1u);
  for (const auto& node : tree.nodes) {
    if (node.depth >= 1) EXPECT_EQ(node.stop, StopReason::depth_cap);
  }
}

TEST(Segment, TwoBreaksRecovered) {
  // Regimes high / low / high with breaks at N/3 and 2N/3. Level 0.01 keeps
  // the three null leaves from producing spurious splits.
  const Eigen::Index third = 200;
  const Eigen::Index n = 3 * third;
  DetectorConfig config = quick_config();
  config.alpha = 0.01;
  config.null_mc.replicates = 500;
  config.null_mc.grid = 200;
  const int reps = 200;
  int exact_two = 0;
  int sound = 0;
  int accepted = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const CurvePanel panel = oracle::regime_panel({third, third, third}, kHigh, kLow, 1000 + rep);
    config.null_mc.seed = 5000 + static_cast<std::uint64_t>(rep);
    const SegmentTree tree = binary_segment(panel, config);
    const auto& cps = tree.change_points;
    if (cps.size() == 2 && std::abs(static_cast<double>(cps[0] - third)) <= 0.02 * n &&
        std::abs(static_cast<double>(cps[1] - 2 * third)) <= 0.02 * n) {
      ++exact_two;
    }
    // Re-test each accepted point's enclosing segment with a fresh seed.
    for (const auto& node : tree.nodes) {
      if (!node.change_point) continue;
      ++accepted;
      DetectorConfig fresh = config;
      fresh.null_mc.seed = 900000 + static_cast<std::uint64_t>(rep) * 16 + static_cast<std::uint64_t>(node.depth);
      fresh.alpha = 0.05;
      if (detect_and_test(panel.slice(node.begin, node.end), fresh).reject) ++sound;
    }
  }
  EXPECT_GE(exact_two, static_cast<int>(0.9 * reps)) << exact_two;
  EXPECT_GE(sound, static_cast<int>(std::ceil(0.95 * accepted))) << sound << "/" << accepted;
}
