#include "covcpd/nulldist.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "covcpd/errors.hpp"
#include "covcpd/parallel.hpp"

namespace covcpd {

namespace {

constexpr std::array<char, 8> kCacheMagic{'C', 'O', 'V', 'C', 'P', 'D', 'N', 'L'};
constexpr std::uint32_t kCacheVersion = 1;

// Tag of the stream that feeds the excursion draws of one replicate.
constexpr std::uint64_t kExcursionStream = 0xffffffffffffffffULL;

// Brownian bridge on {r / R}, built coarse to fine: an exact discrete bridge
// on the odd part R0 of R, then repeated midpoint insertion, each midpoint
// drawn from its conditional law N((left + right) / 2, step / 4). The same
// stream at grid 2R therefore yields a refinement of the path at grid R.
void fill_bridge(Engine& engine, boost::random::normal_distribution<double>& normal, int grid,
                 std::span<double> out) {
  int base = grid;
  int stride = 1;
  while (base % 2 == 0) {
    base /= 2;
    stride *= 2;
  }
  const double step_sd = 1.0 / std::sqrt(static_cast<double>(base));
  double w = 0.0;
  out[0] = 0.0;
  for (int r = 1; r <= base; ++r) {
    w += step_sd * normal(engine);
    out[static_cast<std::size_t>(r * stride)] = w;
  }
  const double inv_base = 1.0 / static_cast<double>(base);
  for (int r = 1; r < base; ++r) out[static_cast<std::size_t>(r * stride)] -= (r * inv_base) * w;
  out[static_cast<std::size_t>(grid)] = 0.0;

  for (int width = stride; width > 1; width /= 2) {
    const int half = width / 2;
    const double sd = 0.5 * std::sqrt(static_cast<double>(width) / static_cast<double>(grid));
    for (int left = 0; left < grid; left += width) {
      const auto l = static_cast<std::size_t>(left);
      out[l + static_cast<std::size_t>(half)] =
          0.5 * (out[l] + out[l + static_cast<std::size_t>(width)]) + sd * normal(engine);
    }
  }
}

// Weight d of replicate r uses the stream derive_seed(seed, {r, d}), so the
// bridges do not depend on the grid size of the other weights.
double simulate_supremum(std::span<const double> rho, int grid, bool correction, std::uint64_t seed,
                         std::uint64_t replicate, std::vector<double>& path, std::vector<double>& level,
                         std::vector<double>& variation) {
  boost::random::normal_distribution<double> normal;
  std::fill(level.begin(), level.end(), 0.0);
  std::fill(variation.begin(), variation.end(), 0.0);
  const auto steps = static_cast<std::size_t>(grid);
  for (std::size_t d = 0; d < rho.size(); ++d) {
    const double weight = rho[d];
    if (weight == 0.0) continue;
    Engine engine = make_engine(seed, {replicate, d});
    fill_bridge(engine, normal, grid, path);
    const double weight_sq = weight * weight;
    for (std::size_t r = 1; r < steps; ++r) {
      const double b2 = path[r] * path[r];
      level[r] += weight * b2;
      variation[r] += weight_sq * b2;
    }
  }
  double sup = *std::max_element(level.begin(), level.end());
  if (!correction) return sup;

  Engine engine = make_engine(seed, {replicate, kExcursionStream});
  boost::random::uniform_01<double> uniform;
  const double inv_grid = 1.0 / static_cast<double>(grid);
  for (std::size_t r = 0; r < steps; ++r) {
    // 1 - U lies in (0, 1], so the log is finite.
    const double u = 1.0 - uniform(engine);
    const double a = level[r];
    const double b = level[r + 1];
    // Local variance rate of sum rho_d B_d^2 is 4 sum rho_d^2 B_d^2; average
    // the two endpoints. Given its endpoints, the maximum of a Brownian
    // motion over the interval is drawn by inverting its exact tail.
    const double var_rate = 2.0 * (variation[r] + variation[r + 1]);
    const double excursion = std::sqrt((b - a) * (b - a) - 2.0 * var_rate * inv_grid * std::log(u));
    sup = std::max(sup, 0.5 * (a + b + excursion));
  }
  return sup;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(is.get())) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(is.get())) << (8 * i);
  return v;
}

}  // namespace

void sample_bridge(Engine& engine, int grid, std::span<double> out) {
  if (grid < 2) throw ArgumentError("bridge grid must have at least two intervals");
  if (out.size() != static_cast<std::size_t>(grid) + 1) throw ArgumentError("bridge buffer must hold R + 1 values");
  boost::random::normal_distribution<double> normal;
  fill_bridge(engine, normal, grid, out);
}

NullDistribution simulate_null(std::span<const double> rho, const NullMcSpec& spec) {
  if (spec.replicates < 1) throw ArgumentError("null simulation needs at least one replicate");
  if (spec.grid < 2) throw ArgumentError("null simulation grid must be at least 2");
  for (double value : rho) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ArgumentError("eigenvalue weights must be finite and nonnegative");
    }
  }

  NullDistribution dist;
  dist.rho_used.assign(rho.begin(), rho.end());
  dist.grid_r = spec.grid;
  dist.seed = spec.seed;
  dist.bridge_correction = spec.bridge_correction;
  dist.samples.resize(static_cast<std::size_t>(spec.replicates));

  const int workers = std::min(resolve_threads(spec.threads), spec.replicates);
  const std::size_t per_worker = (static_cast<std::size_t>(spec.replicates) + workers - 1) / workers;
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const std::size_t begin = w * per_worker;
    const std::size_t end = std::min(dist.samples.size(), begin + per_worker);
    const auto points = static_cast<std::size_t>(spec.grid) + 1;
    std::vector<double> path(points), level(points), variation(points);
    for (std::size_t r = begin; r < end; ++r) {
      dist.samples[r] = simulate_supremum(dist.rho_used, spec.grid, spec.bridge_correction, spec.seed, r, path,
                                          level, variation);
    }
  });
  std::sort(dist.samples.begin(), dist.samples.end());
  return dist;
}

NullDistribution simulate_null(std::span<const double> rho, int replicates, int grid, std::uint64_t seed,
                               int threads) {
  NullMcSpec spec;
  spec.replicates = replicates;
  spec.grid = grid;
  spec.seed = seed;
  spec.threads = threads;
  return simulate_null(rho, spec);
}

double critical_value(const NullDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (dist.samples.empty()) throw ArgumentError("empty null distribution");
  const double m = static_cast<double>(dist.samples.size());
  // The small offset keeps (1 - alpha) M from rounding up past an integer,
  // e.g. 0.95 * 20000 = 19000.000000000004.
  auto index = static_cast<std::size_t>(std::ceil((1.0 - alpha) * m - 1e-9));
  index = std::clamp<std::size_t>(index, 1, dist.samples.size());
  return dist.samples[index - 1];
}

double p_value(double t_obs, const NullDistribution& dist) {
  const auto first = std::lower_bound(dist.samples.begin(), dist.samples.end(), t_obs);
  const auto exceed = static_cast<double>(dist.samples.end() - first);
  return (1.0 + exceed) / (static_cast<double>(dist.samples.size()) + 1.0);
}

std::uint64_t rho_hash(std::span<const double> rho) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double value : rho) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void write_null_cache(const std::filesystem::path& path, const NullDistribution& dist) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open null cache for writing: " + path.string());
  os.write(kCacheMagic.data(), kCacheMagic.size());
  put_u32(os, kCacheVersion);
  put_u32(os, dist.bridge_correction ? 1u : 0u);
  put_u64(os, rho_hash(dist.rho_used));
  put_u64(os, dist.samples.size());
  put_u64(os, static_cast<std::uint64_t>(dist.grid_r));
  put_u64(os, dist.seed);
  for (double value : dist.samples) put_u64(os, std::bit_cast<std::uint64_t>(value));
  if (!os) throw Error("failed writing null cache: " + path.string());
}

std::optional<NullDistribution> read_null_cache(const std::filesystem::path& path,
                                                std::span<const double> rho, const NullMcSpec& spec) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCacheMagic) return std::nullopt;
  if (get_u32(is) != kCacheVersion) return std::nullopt;
  const bool correction = (get_u32(is) & 1u) != 0;
  const std::uint64_t hash = get_u64(is);
  const std::uint64_t m = get_u64(is);
  const std::uint64_t grid = get_u64(is);
  const std::uint64_t seed = get_u64(is);
  if (!is || correction != spec.bridge_correction || hash != rho_hash(rho) ||
      m != static_cast<std::uint64_t>(spec.replicates) || grid != static_cast<std::uint64_t>(spec.grid) ||
      seed != spec.seed) {
    return std::nullopt;
  }
  NullDistribution dist;
  dist.rho_used.assign(rho.begin(), rho.end());
  dist.grid_r = spec.grid;
  dist.seed = spec.seed;
  dist.bridge_correction = correction;
  dist.samples.resize(m);
  for (auto& value : dist.samples) value = std::bit_cast<double>(get_u64(is));
  if (!is) return std::nullopt;
  return dist;
}

}  // namespace covcpd
