#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covcpd/covtensor.hpp"
#include "covcpd/cusum.hpp"
#include "covcpd/longrun.hpp"
#include "covcpd/nulldist.hpp"

namespace covcpd {

struct DetectorConfig {
  double alpha = 0.05;
  LongRunSpec longrun;
  TruncationRule truncation;
  NullMcSpec null_mc;
  bool demean = false;
  bool rescale = false;
  int min_segment = 30;
  int max_depth = 8;
};

// Checks alpha, min_segment >= 2 (p + 1) and max_depth >= 1.
void validate(const DetectorConfig& config, int p);

struct TestResult {
  Eigen::Index n = 0;
  double t_max = 0.0;
  Eigen::Index k_hat = 0;  // 1-based within the tested sequence
  double theta_hat = 0.0;
  double crit = 0.0;
  double p = 1.0;
  bool reject = false;
  int bandwidth = 0;
  std::uint64_t null_seed = 0;
  EigenSpectrum spectrum;
};

// Preprocessing in the fixed order demean -> rescale (only the requested steps).
CurvePanel preprocess(const CurvePanel& panel, const DetectorConfig& config);

// Candidate, long-run spectrum and Monte Carlo decision on an already
// preprocessed panel, with the null simulated from `null_seed`.
TestResult test_panel(const CurvePanel& panel, const DetectorConfig& config, std::uint64_t null_seed,
                      CusumCurve* curve_out = nullptr);

// Single change-point detection and test: preprocess, lift, scan, estimate
// the spectrum over the whole sequence, simulate the null and decide.
// Rejects iff t_max > crit.
TestResult detect_and_test(const CurvePanel& panel, const DetectorConfig& config,
                           CusumCurve* curve_out = nullptr);

enum class StopReason { split, not_significant, too_short, depth_cap };

std::string to_string(StopReason reason);

struct SegmentNode {
  Eigen::Index begin = 0;  // absolute, half-open [begin, end)
  Eigen::Index end = 0;
  int depth = 0;
  std::optional<TestResult> test;
  StopReason stop = StopReason::not_significant;
  std::optional<Eigen::Index> change_point;  // absolute index of the last curve before the break
  int left = -1;
  int right = -1;
};

struct SegmentTree {
  std::vector<Eigen::Index> change_points;  // ascending, absolute
  std::vector<SegmentNode> nodes;           // pre-order, left child before right
};

// Binary segmentation: test a segment, split at its candidate on rejection
// and recurse on both halves with everything re-estimated locally. A split is
// accepted only if both halves keep at least min_segment curves. No
// multiplicity correction is applied across levels.
SegmentTree binary_segment(const CurvePanel& panel, const DetectorConfig& config);

}  // namespace covcpd
