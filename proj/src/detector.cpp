#include "covcpd/detector.hpp"

#include <algorithm>
#include <string>

#include "covcpd/errors.hpp"

namespace covcpd {

void validate(const DetectorConfig& config, int p) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (config.min_segment < 2 * (p + 1)) {
    throw ArgumentError("min_segment must be at least 2 (p + 1) = " + std::to_string(2 * (p + 1)));
  }
  if (config.max_depth < 1) throw ArgumentError("max_depth must be at least 1");
}

CurvePanel preprocess(const CurvePanel& panel, const DetectorConfig& config) {
  CurvePanel out = panel;
  if (config.demean && !out.demeaned) out = demean_curves(std::move(out));
  if (config.rescale && !out.rescaled) out = rescale_unit_norm(std::move(out));
  return out;
}

TestResult test_panel(const CurvePanel& panel, const DetectorConfig& config, std::uint64_t null_seed,
                      CusumCurve* curve_out) {
  const CovCoeffSeq seq = lift_to_cov(panel);
  CusumCurve curve = cusum_curve(seq);

  TestResult result;
  result.n = seq.n();
  result.k_hat = curve.argmax_k;
  result.theta_hat = curve.theta_hat;
  result.t_max = curve.t_max;
  result.bandwidth = config.longrun.resolved_bandwidth(seq.n());
  result.spectrum = eigenvalues(longrun_matrix(seq, config.longrun), seq.sym, config.truncation);

  NullMcSpec mc = config.null_mc;
  mc.seed = null_seed;
  result.null_seed = null_seed;
  const NullDistribution null = simulate_null(result.spectrum.kept(), mc);
  result.crit = critical_value(null, config.alpha);
  result.p = p_value(result.t_max, null);
  result.reject = result.t_max > result.crit;

  if (curve_out != nullptr) *curve_out = std::move(curve);
  return result;
}

TestResult detect_and_test(const CurvePanel& panel, const DetectorConfig& config, CusumCurve* curve_out) {
  validate(panel);
  validate(config, panel.p());
  if (panel.n() < config.min_segment) {
    throw SegmentTooShort("sequence of " + std::to_string(panel.n()) + " curves is shorter than min_segment " +
                          std::to_string(config.min_segment));
  }
  return test_panel(preprocess(panel, config), config, config.null_mc.seed, curve_out);
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::split:
      return "split";
    case StopReason::not_significant:
      return "not_significant";
    case StopReason::too_short:
      return "too_short";
    case StopReason::depth_cap:
      return "depth_cap";
  }
  return "unknown";
}

namespace {

int segment_node(const CurvePanel& panel, const DetectorConfig& config, Eigen::Index begin, Eigen::Index end,
                 int depth, SegmentTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  SegmentNode node;
  node.begin = begin;
  node.end = end;
  node.depth = depth;
  tree.nodes.push_back(std::move(node));
  const Eigen::Index length = end - begin;
  if (length < config.min_segment) {
    tree.nodes[static_cast<std::size_t>(id)].stop = StopReason::too_short;
    return id;
  }
  if (depth >= config.max_depth) {
    tree.nodes[static_cast<std::size_t>(id)].stop = StopReason::depth_cap;
    return id;
  }

  // The root uses the configured seed so that a single-segment run agrees
  // with detect_and_test.
  const std::uint64_t seed =
      depth == 0 ? config.null_mc.seed
                 : derive_seed(config.null_mc.seed, {static_cast<std::uint64_t>(begin), static_cast<std::uint64_t>(end)});
  TestResult result = test_panel(panel.slice(begin, end), config, seed);
  const Eigen::Index k = result.k_hat;
  const bool reject = result.reject;
  tree.nodes[static_cast<std::size_t>(id)].test = std::move(result);

  if (!reject) {
    tree.nodes[static_cast<std::size_t>(id)].stop = StopReason::not_significant;
    return id;
  }
  if (k < config.min_segment || length - k < config.min_segment) {
    tree.nodes[static_cast<std::size_t>(id)].stop = StopReason::too_short;
    return id;
  }
  const Eigen::Index split = begin + k;
  tree.nodes[static_cast<std::size_t>(id)].stop = StopReason::split;
  tree.nodes[static_cast<std::size_t>(id)].change_point = split;
  tree.change_points.push_back(split);
  const int left = segment_node(panel, config, begin, split, depth + 1, tree);
  const int right = segment_node(panel, config, split, end, depth + 1, tree);
  tree.nodes[static_cast<std::size_t>(id)].left = left;
  tree.nodes[static_cast<std::size_t>(id)].right = right;
  return id;
}

}  // namespace

SegmentTree binary_segment(const CurvePanel& panel, const DetectorConfig& config) {
  validate(panel);
  validate(config, panel.p());
  const CurvePanel prepared = preprocess(panel, config);
  SegmentTree tree;
  segment_node(prepared, config, 0, prepared.n(), 0, tree);
  std::sort(tree.change_points.begin(), tree.change_points.end());
  return tree;
}

}  // namespace covcpd
