#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdosim/adversary.hpp"
#include "sdosim/circuit.hpp"
#include "sdosim/directory.hpp"

namespace sdosim::mc {

/// Relay population for an experiment: a CSV file, or a synthetic one built
/// from the master seed.
struct DirectorySource {
  std::optional<std::filesystem::path> file;
  std::size_t relays = 3000;
  BandwidthDist bandwidth;
  RoleMix mix;
};

struct ExperimentConfig {
  std::vector<double> t{0.2};
  std::vector<double> g{1.0 / 3.0};
  std::vector<double> f{0.0};
  std::vector<double> d{1.0};
  std::vector<int> n{10};
  std::vector<int> k{3};
  std::vector<int> threshold{2};
  int trials = 100;
  DirectorySource directory;
  SamplingMode mode = SamplingMode::Realistic;
  bool randomize_middle = false;
  StrategyKind strategy = StrategyKind::SimpleSelective;
  std::size_t guard_count = 3;
  std::uint64_t seed = 1;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  /// Non-empty grids, trials >= 2, values in range. Throws std::invalid_argument.
  void validate() const;
};

struct GridPoint {
  double t = 0.0;
  double g = 0.0;
  double f = 0.0;
  double d = 0.0;
  int n = 0;
  int k = 0;
  int threshold = 0;
};

/// Cartesian product in (t, g, f, d, N, K, Th) order, Th varying fastest.
/// Combinations with K >= N or Th > K are skipped.
std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

enum class Metric : std::uint8_t {
  FN,             // accepted CXC / live CXC, 0 when no live CXC
  FP,             // rejected live HHH / live HHH, 0 when no live HHH
  FnDefined,      // FN over trials with at least one live CXC
  FpDefined,      // FP over trials with at least one live HHH
  PrCXC,
  PrHHH,
  PrOthers,
  Psi,            // redefined security from the usage probabilities
  Eta,            // (phase-1 attempts + probes) / usable accepted circuits
  EtaNet,       // same, without attempts lost to network failure
  BaselinePrCxc,  // CXC share of phase-1 survivors (no defense)
};

inline constexpr std::size_t kMetricCount = 11;

inline constexpr std::array<Metric, kMetricCount> kMetrics{
    Metric::FN,    Metric::FP,       Metric::FnDefined, Metric::FpDefined,
    Metric::PrCXC, Metric::PrHHH,    Metric::PrOthers,  Metric::Psi,
    Metric::Eta,   Metric::EtaNet, Metric::BaselinePrCxc};

std::string_view to_string(Metric m) noexcept;

/// Per-class circuit counts of one or more trials.
struct ClassTally {
  std::uint64_t cxc = 0;
  std::uint64_t hhh = 0;
  std::uint64_t others = 0;

  void add(CircuitClass c) noexcept;
  ClassTally& operator+=(const ClassTally& o) noexcept;
};

struct TrialCounts {
  ClassTally survivors;  // phase 1
  ClassTally live;       // survivors still live in phase 2
  ClassTally accepted;
  std::uint64_t attempts = 0;
  std::uint64_t network_failures = 0;
  std::uint64_t probes = 0;

  TrialCounts& operator+=(const TrialCounts& o) noexcept;
};

struct TrialOutcome {
  TrialCounts counts;
  /// nullopt where the metric is undefined for this trial.
  std::array<std::optional<double>, kMetricCount> samples{};

  const std::optional<double>& operator[](Metric m) const noexcept {
    return samples[static_cast<std::size_t>(m)];
  }
};

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Normal-approximation 95% interval: mean +- 1.96 s / sqrt(n) with the
/// sample standard deviation. Needs at least two samples.
Interval ci_95(std::span<const double> samples);

struct Estimate {
  double mean = 0.0;
  /// NaN when fewer than two samples were defined.
  double half_width = 0.0;
  std::size_t samples = 0;
  std::size_t undefined = 0;
};

struct PointEstimate {
  GridPoint point;
  std::array<Estimate, kMetricCount> metrics{};
  TrialCounts totals;
  /// First failure among the point's trials; metrics are unset when present.
  std::optional<std::string> error;

  const Estimate& operator[](Metric m) const noexcept {
    return metrics[static_cast<std::size_t>(m)];
  }
};

struct EstimateSeries {
  StrategyKind strategy = StrategyKind::SimpleSelective;
  std::vector<PointEstimate> points;
};

/// Builds (or loads) the directory for a config.
Directory make_directory(const ExperimentConfig& cfg);

/// One guard selection plus both detection phases on a tagged directory.
TrialOutcome run_trial(const Directory& tagged, const GridPoint& point,
                       const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Runs every grid point `cfg.trials` times. Seeds derive from
/// (cfg.seed, point index, trial index), so the result is the same for any
/// thread count.
EstimateSeries run_experiment(const ExperimentConfig& cfg);
EstimateSeries run_experiment(const ExperimentConfig& cfg, const Directory& untagged);

struct StrategyComparison {
  EstimateSeries simple;
  EstimateSeries shrewd;
};

/// Runs the config under both dropping strategies with shared seeds.
StrategyComparison compare_strategies(const ExperimentConfig& cfg);

}  // namespace sdosim::mc
