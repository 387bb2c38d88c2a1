#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "covcpd/rng.hpp"

namespace covcpd {

// Monte Carlo settings for the limiting null law sup_theta sum_d rho_d B_d(theta)^2.
struct NullMcSpec {
  int replicates = 5000;  // M
  int grid = 1000;        // R
  std::uint64_t seed = 20211014;
  int threads = 0;  // 0: all hardware threads
  // Adds the expected excursion of the process between grid points (see
  // simulate_null). Off gives the plain grid maximum.
  bool bridge_correction = true;
};

struct NullDistribution {
  std::vector<double> samples;  // ascending
  std::vector<double> rho_used;
  int grid_r = 0;
  std::uint64_t seed = 0;
  bool bridge_correction = true;

  std::size_t size() const noexcept { return samples.size(); }
};

// One standard Brownian bridge on {r / R : r = 0..R}; out must hold R + 1
// values. out[0] and out[R] are exactly zero. Built on the odd part of R and
// refined by midpoint insertion.
void sample_bridge(Engine& engine, int grid, std::span<double> out);

// Simulates M suprema. Bridge d of replicate r draws from an engine seeded by
// derive_seed(seed, {r, d}), so the output is bitwise identical for every
// thread count, and a run at grid 2R refines the paths of a run at grid R.
// With the bridge correction each grid interval contributes a draw of the
// maximum of a Brownian motion joining the two grid values, with the local
// quadratic variation 4 sum_d rho_d^2 B_d^2 of the weighted process.
NullDistribution simulate_null(std::span<const double> rho, const NullMcSpec& spec);

NullDistribution simulate_null(std::span<const double> rho, int replicates, int grid, std::uint64_t seed,
                               int threads = 0);

// Order statistic at 1-based index ceil((1 - alpha) M).
double critical_value(const NullDistribution& dist, double alpha);

// (1 + #{samples >= t_obs}) / (M + 1).
double p_value(double t_obs, const NullDistribution& dist);

// FNV-1a over the little-endian bytes of rho.
std::uint64_t rho_hash(std::span<const double> rho);

// Cache layout (all integers and floats little-endian):
//   char[8] "COVCPDNL" | u32 version (1) | u32 flags (bit 0: bridge correction)
//   u64 rho_hash | u64 M | u64 R | u64 seed | f64 samples[M]
void write_null_cache(const std::filesystem::path& path, const NullDistribution& dist);

// Returns the cached distribution when the header matches (rho, spec), else nullopt.
std::optional<NullDistribution> read_null_cache(const std::filesystem::path& path,
                                                std::span<const double> rho, const NullMcSpec& spec);

}  // namespace covcpd
