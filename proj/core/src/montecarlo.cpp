#include "sdosim/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "sdosim/detection.hpp"
#include "sdosim/errors.hpp"
#include "sdosim/rng.hpp"

namespace sdosim::mc {
namespace {

// Seed-derivation tags.
constexpr std::uint64_t kDirectoryTag = 0xd1;
constexpr std::uint64_t kTaggingTag = 0x7a;
constexpr std::uint64_t kTrialTag = 0x71;
constexpr std::uint64_t kGuardTag = 0x6a;

void require_fractions(const std::vector<double>& xs, const char* name) {
  if (xs.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (double x : xs) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " values must lie in [0, 1]");
    }
  }
}

double ratio(std::uint64_t num, double den) { return static_cast<double>(num) / den; }

std::size_t slot(Metric m) { return static_cast<std::size_t>(m); }

Estimate summarize(const std::vector<TrialOutcome>& trials, Metric m) {
  std::vector<double> xs;
  xs.reserve(trials.size());
  Estimate e;
  for (const TrialOutcome& t : trials) {
    if (const auto& v = t[m]) {
      xs.push_back(*v);
    } else {
      ++e.undefined;
    }
  }
  // Undefined FN/FP trials count as zero in the headline rate; the
  // conditional variants keep them out.
  if (m == Metric::FN || m == Metric::FP) {
    xs.insert(xs.end(), e.undefined, 0.0);
  }
  e.samples = xs.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() >= 2) {
    const Interval ci = ci_95(xs);
    e.mean = ci.mean;
    e.half_width = ci.half_width;
  } else {
    e.mean = xs.empty() ? nan : xs.front();
    e.half_width = nan;
  }
  return e;
}

}  // namespace

void ExperimentConfig::validate() const {
  require_fractions(t, "t");
  require_fractions(g, "g");
  require_fractions(f, "f");
  require_fractions(d, "d");
  for (double x : f) {
    if (x >= 1.0) throw std::invalid_argument("f values must be below 1");
  }
  if (n.empty() || k.empty() || threshold.empty()) {
    throw std::invalid_argument("N, K and Th grids must be non-empty");
  }
  for (int x : n) {
    if (x < 2) throw std::invalid_argument("N values must be at least 2");
  }
  for (int x : k) {
    if (x < 1) throw std::invalid_argument("K values must be positive");
  }
  for (int x : threshold) {
    if (x < 1) throw std::invalid_argument("Th values must be positive");
  }
  if (trials < 2) throw std::invalid_argument("trials must be at least 2");
  if (guard_count < 1) throw std::invalid_argument("guard count must be positive");
  if (!directory.file) {
    directory.bandwidth.validate();
    directory.mix.validate();
  }
  if (expand_grid(*this).empty()) {
    throw std::invalid_argument("no grid point satisfies 1 <= Th <= K < N");
  }
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  std::vector<GridPoint> out;
  for (double t : cfg.t)
    for (double g : cfg.g)
      for (double f : cfg.f)
        for (double d : cfg.d)
          for (int n : cfg.n)
            for (int k : cfg.k)
              for (int th : cfg.threshold) {
                if (k >= n || th > k) continue;
                out.push_back({t, g, f, d, n, k, th});
              }
  return out;
}

std::string_view to_string(Metric m) noexcept {
  static constexpr std::array<std::string_view, kMetricCount> names{
      "fn",     "fp",  "fn_defined", "fp_defined", "pr_cxc",         "pr_hhh",
      "pr_others", "psi", "eta",        "eta_net",  "baseline_pr_cxc"};
  return names[slot(m)];
}

void ClassTally::add(CircuitClass c) noexcept {
  switch (c.kind) {
    case ClassKind::CXC: ++cxc; break;
    case ClassKind::HHH: ++hhh; break;
    case ClassKind::Other: ++others; break;
  }
}

ClassTally& ClassTally::operator+=(const ClassTally& o) noexcept {
  cxc += o.cxc;
  hhh += o.hhh;
  others += o.others;
  return *this;
}

TrialCounts& TrialCounts::operator+=(const TrialCounts& o) noexcept {
  survivors += o.survivors;
  live += o.live;
  accepted += o.accepted;
  attempts += o.attempts;
  network_failures += o.network_failures;
  probes += o.probes;
  return *this;
}

Interval ci_95(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("ci_95 needs at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

Directory make_directory(const ExperimentConfig& cfg) {
  if (cfg.directory.file) return load_directory(*cfg.directory.file);
  return synthesize_directory(cfg.directory.relays, cfg.directory.bandwidth, cfg.directory.mix,
                              derive_seed(cfg.seed, {kDirectoryTag}));
}

TrialOutcome run_trial(const Directory& tagged, const GridPoint& point,
                       const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  const GuardSet guards =
      select_guard_set(tagged, cfg.guard_count, point.g, derive_seed(trial_seed, {kGuardTag}));

  DetectionConfig dc;
  dc.g = point.g;
  dc.guard_count = cfg.guard_count;
  dc.strategy = {cfg.strategy, point.d};
  dc.env.failure_rate = point.f;
  dc.params = {point.n, point.k, point.threshold};
  dc.mode = cfg.mode;
  dc.randomize_middle = cfg.randomize_middle;
  dc.seed = trial_seed;
  const DetectionResult r = run_detection(tagged, guards, dc);

  TrialOutcome out;
  TrialCounts& c = out.counts;
  std::uint64_t rejected_live_hhh = 0;
  for (const CircuitVerdict& v : r.verdicts) {
    const CircuitClass cls = classify(v.circuit);
    c.survivors.add(cls);
    if (!v.live) continue;
    c.live.add(cls);
    if (v.accepted) {
      c.accepted.add(cls);
    } else if (cls.kind == ClassKind::HHH) {
      ++rejected_live_hhh;
    }
  }
  c.attempts = r.phase1_attempts;
  c.network_failures = r.phase1_network_failures;
  c.probes = r.phase2_probes;

  auto set = [&](Metric m, double v) { out.samples[slot(m)] = v; };
  if (c.live.cxc > 0) {
    const double fn = ratio(c.accepted.cxc, static_cast<double>(c.live.cxc));
    set(Metric::FN, fn);
    set(Metric::FnDefined, fn);
  }
  if (c.live.hhh > 0) {
    const double fp = ratio(rejected_live_hhh, static_cast<double>(c.live.hhh));
    set(Metric::FP, fp);
    set(Metric::FpDefined, fp);
  }
  set(Metric::BaselinePrCxc,
      ratio(c.survivors.cxc, static_cast<double>(r.verdicts.size())));

  const double usable = static_cast<double>(c.accepted.cxc + c.accepted.hhh) +
                        (1.0 - point.d) * static_cast<double>(c.accepted.others);
  if (usable > 0.0) {
    const double pr_cxc = ratio(c.accepted.cxc, usable);
    const double pr_hhh = ratio(c.accepted.hhh, usable);
    const double pr_others = (1.0 - point.d) * ratio(c.accepted.others, usable);
    set(Metric::PrCXC, pr_cxc);
    set(Metric::PrHHH, pr_hhh);
    set(Metric::PrOthers, pr_others);
    const double den = pr_cxc + pr_hhh + (1.0 - point.d) * pr_others;
    if (den > 0.0) set(Metric::Psi, 1.0 - pr_cxc / den);
    set(Metric::Eta, static_cast<double>(c.attempts + c.probes) / usable);
    set(Metric::EtaNet,
        static_cast<double>(c.attempts - c.network_failures + c.probes) / usable);
  }
  return out;
}

EstimateSeries run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, make_directory(cfg));
}

EstimateSeries run_experiment(const ExperimentConfig& cfg, const Directory& untagged) {
  cfg.validate();
  const std::vector<GridPoint> grid = expand_grid(cfg);

  // One tagged directory per t value, tagged with a seed tied to its grid position.
  std::vector<Directory> tagged;
  tagged.reserve(cfg.t.size());
  for (std::size_t i = 0; i < cfg.t.size(); ++i) {
    tagged.push_back(tag_compromised(untagged, cfg.t[i], derive_seed(cfg.seed, {kTaggingTag, i})));
  }
  std::vector<std::size_t> tag_index;
  tag_index.reserve(grid.size());
  for (const GridPoint& p : grid) {
    std::size_t i = 0;
    while (cfg.t[i] != p.t) ++i;
    tag_index.push_back(i);
  }

  const auto trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = grid.size() * trials;
  std::vector<TrialOutcome> outcomes(total);
  std::vector<std::optional<std::string>> failures(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t p = job / trials;
      const std::size_t trial = job % trials;
      const std::uint64_t seed = derive_seed(cfg.seed, {kTrialTag, p, trial});
      try {
        outcomes[job] = run_trial(tagged[tag_index[p]], grid[p], cfg, seed);
      } catch (const std::exception& e) {
        failures[job] = e.what();
      }
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(total, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  EstimateSeries series;
  series.strategy = cfg.strategy;
  series.points.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    PointEstimate est;
    est.point = grid[p];
    const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>(p * trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      if (failures[p * trials + trial]) {
        est.error = "trial " + std::to_string(trial) + ": " + *failures[p * trials + trial];
        break;
      }
    }
    if (!est.error) {
      const std::vector<TrialOutcome> slice(first, first + static_cast<std::ptrdiff_t>(trials));
      for (const TrialOutcome& t : slice) est.totals += t.counts;
      for (Metric m : kMetrics) est.metrics[slot(m)] = summarize(slice, m);
    }
    series.points.push_back(std::move(est));
  }
  return series;
}

StrategyComparison compare_strategies(const ExperimentConfig& cfg) {
  cfg.validate();
  const Directory untagged = make_directory(cfg);
  ExperimentConfig simple = cfg;
  simple.strategy = StrategyKind::SimpleSelective;
  ExperimentConfig shrewd = cfg;
  shrewd.strategy = StrategyKind::Shrewd;
  return {run_experiment(simple, untagged), run_experiment(shrewd, untagged)};
}

}  // namespace sdosim::mc
