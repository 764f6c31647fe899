#include "cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "cli/output.hpp"
#include "cli/settings.hpp"
#include "sdosim/analytic.hpp"
#include "sdosim/errors.hpp"
#include "sdosim/montecarlo.hpp"

#ifndef SDOSIM_VERSION
#define SDOSIM_VERSION "0.0.0"
#endif

namespace sdosim::cli {
namespace {

using nlohmann::json;

const RawSettings& defaults_for(const std::string& command) {
  static const RawSettings point{{"t", "0.2"},     {"g", "1/3"},         {"f", "0.23"},
                                 {"d", "1"},       {"N", "10"},          {"K", "3"},
                                 {"Th", "2"},      {"strategy", "simple"}, {"mode", "realistic"},
                                 {"randomize_middle", "false"}, {"relays", "3000"},
                                 {"bandwidth", "pareto:1.5:50"}, {"guards", "3"},
                                 {"trials", "100"}, {"threads", "0"}};
  static const RawSettings sweep = [] {
    RawSettings s = point;
    s["g"] = "0,1/3,2/3,1";
    s["d"] = "0:0.1:1";
    return s;
  }();
  return command == "simulate" ? sweep : point;
}

// Keys that never change results and so stay out of the hash.
bool affects_results(const std::string& key) {
  return key != "threads" && key != "out" && key != "seed";
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Invocation {
  std::string command;
  RawSettings raw;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  const std::string& get(const std::string& key) const {
    const auto it = raw.find(key);
    if (it == raw.end()) throw UsageError("missing value for " + key);
    return it->second;
  }
  bool has(const std::string& key) const { return raw.count(key) > 0; }

  double scalar(const std::string& key) const {
    const auto xs = parse_number_list(get(key), key);
    if (xs.size() != 1) throw UsageError(command + " takes a single value for --" + key);
    return xs.front();
  }
  std::vector<double> list(const std::string& key) const { return parse_number_list(get(key), key); }
  bool n_auto() const { return get("N") == "auto"; }

  std::vector<std::string> comments() const {
    std::vector<std::string> c;
    c.push_back(std::string("sdosim ") + SDOSIM_VERSION + " " + command);
    c.push_back("config_hash=" + hex(config_hash) + " seed=" + std::to_string(seed));
    return c;
  }
};

std::string describe(const Invocation& inv, std::initializer_list<const char*> keys) {
  std::string s;
  for (const char* k : keys) {
    if (!inv.has(k)) continue;
    if (!s.empty()) s += ' ';
    s += std::string(k) + "=" + inv.get(k);
  }
  return s;
}

int resolve_n(const Invocation& inv, double t, double g) {
  if (inv.n_auto()) return analytic::compute_n(t, g);
  const auto n = parse_int_list(inv.get("N"), "N");
  if (n.size() != 1) throw UsageError(inv.command + " takes a single value for --N");
  return n.front();
}

void require_full_drop(const Invocation& inv, double d) {
  if (d != 1.0) {
    throw UsageError(inv.command + " uses the closed-form FN/FP, which assume --d 1");
  }
}

json manifest(const Invocation& inv, const Sink& sink, const json& extra) {
  json m;
  m["tool"] = "sdosim";
  m["version"] = SDOSIM_VERSION;
  m["command"] = inv.command;
  m["config_hash"] = hex(inv.config_hash);
  m["seed"] = inv.seed;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  m["timestamp"] = stamp;
  json params = json::object();
  for (const auto& [k, v] : inv.raw) params[k] = v;
  m["parameters"] = params;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  json outputs = json::array();
  for (const auto& p : sink.written()) outputs.push_back(p.filename().string());
  m["outputs"] = outputs;
  return m;
}

void finish(const Invocation& inv, Sink& sink, const json& extra = json::object()) {
  if (!sink.to_files()) return;
  std::ofstream f(*sink.dir() / "manifest.json");
  if (!f) throw Error("cannot write manifest.json");
  f << manifest(inv, sink, extra).dump(2) << '\n';
}

// ---------------------------------------------------------------- analytic

int cmd_analytic(const Invocation& inv, Sink& sink, std::ostream& err) {
  const double t = inv.scalar("t"), g = inv.scalar("g"), f = inv.scalar("f"),
               d = inv.scalar("d");
  require_full_drop(inv, d);
  const int n = resolve_n(inv, t, g);
  const auto ks = parse_int_list(inv.get("K"), "K");
  const ThresholdSpec th = parse_threshold(inv.get("Th"));

  auto comments = inv.comments();
  comments.push_back(describe(inv, {"t", "g", "f", "d"}) + " N=" + std::to_string(n));
  CsvTable table(comments, "K,Th,fn,fp,psi,eta");
  const std::string marker = "ERR";
  for (int k : ks) {
    for (int threshold : th.for_k(k)) {
      const analytic::ModelParams p{t, g, f, d, n, k, threshold};
      std::vector<std::string> row{std::to_string(k), std::to_string(threshold)};
      try {
        p.validate();
        const analytic::ErrorRates r = analytic::error_rates(p);
        row.push_back(fmt(r.fn));
        row.push_back(fmt(r.fp));
        try {
          row.push_back(fmt(analytic::psi(t, g, r)));
          row.push_back(fmt(analytic::eta(t, g, k, r)));
        } catch (const DegenerateError& e) {
          row.resize(4);
          row.push_back(marker);
          row.push_back(marker);
          err << "K=" << k << " Th=" << threshold << ": " << e.what() << '\n';
        }
      } catch (const std::invalid_argument& e) {
        row.resize(2);
        row.insert(row.end(), 4, marker);
        err << "K=" << k << " Th=" << threshold << ": " << e.what() << '\n';
      }
      table.row(row);
    }
  }
  sink.emit("analytic.csv", table.str());
  finish(inv, sink, json{{"N", n}});
  return 0;
}

// --------------------------------------------------------------- crossover

std::string_view kind_name(analytic::CrossoverKind k) {
  switch (k) {
    case analytic::CrossoverKind::Bracketed: return "bracket";
    case analytic::CrossoverKind::BelowRange: return "below";
    case analytic::CrossoverKind::AboveRange: return "above";
  }
  return "?";
}

int cmd_crossover(const Invocation& inv, Sink& sink, std::ostream&) {
  const double t = inv.scalar("t"), g = inv.scalar("g"), f = inv.scalar("f"),
               d = inv.scalar("d");
  require_full_drop(inv, d);
  const int n = resolve_n(inv, t, g);
  auto ks = parse_int_list(inv.get("K"), "K");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1 || ks.back() >= n) {
    throw UsageError("crossover needs 1 <= K < N (N=" + std::to_string(n) + ")");
  }
  const auto rows = analytic::crossover_tuning(t, g, f, d, n, ks.back());

  auto comments = inv.comments();
  comments.push_back(describe(inv, {"t", "g", "f", "d"}) + " N=" + std::to_string(n));
  CsvTable table(comments, "K,th_low,th_high,kind,fn_low,fp_low,fn_high,fp_high");
  for (const analytic::Crossover& c : rows) {
    if (!std::binary_search(ks.begin(), ks.end(), c.k)) continue;
    table.row({std::to_string(c.k), std::to_string(c.th_low), std::to_string(c.th_high),
               std::string(kind_name(c.kind)), fmt(c.fn_low), fmt(c.fp_low), fmt(c.fn_high),
               fmt(c.fp_high)});
  }
  sink.emit("crossover.csv", table.str());
  finish(inv, sink, json{{"N", n}});
  return 0;
}

// ------------------------------------------------------------------ params

int cmd_params(const Invocation& inv, Sink& sink, std::ostream&) {
  const double t = inv.scalar("t"), g = inv.scalar("g");
  const int n = resolve_n(inv, t, g);
  const analytic::ParamRanges r = analytic::param_ranges(t, g, n);

  auto comments = inv.comments();
  comments.push_back(describe(inv, {"t", "g"}) + " N=" + std::to_string(n));
  comments.push_back("n_cxc=" + fmt(r.n_cxc) + " m_range=(" + fmt(r.m_min) + "," +
                     (std::isinf(r.m_max) ? std::string("inf") : fmt(r.m_max)) +
                     ") K_range=(" + fmt(r.k_min) + "," + fmt(r.k_max) + ")");
  if (r.empty()) comments.push_back("empty range: no (K, Th) satisfies the constraints");
  CsvTable table(comments, "K,th_min,th_max");
  for (const analytic::ThresholdRange& tr : r.thresholds) {
    if (tr.empty()) continue;
    table.row({std::to_string(tr.k), std::to_string(tr.th_min), std::to_string(tr.th_max)});
  }
  sink.emit("params.csv", table.str());
  finish(inv, sink, json{{"N", n}});
  return 0;
}

// ---------------------------------------------------------------- simulate

mc::ExperimentConfig experiment_config(const Invocation& inv) {
  mc::ExperimentConfig cfg;
  cfg.t = inv.list("t");
  cfg.g = inv.list("g");
  cfg.f = inv.list("f");
  cfg.d = inv.list("d");
  if (inv.n_auto()) {
    if (cfg.t.size() != 1 || cfg.g.size() != 1) {
      throw UsageError("--N auto needs a single t and g");
    }
    cfg.n = {analytic::compute_n(cfg.t.front(), cfg.g.front())};
  } else {
    cfg.n = parse_int_list(inv.get("N"), "N");
  }
  cfg.k = parse_int_list(inv.get("K"), "K");
  const int k_max = *std::max_element(cfg.k.begin(), cfg.k.end());
  cfg.threshold = parse_threshold(inv.get("Th")).flatten(k_max);

  const auto trials = parse_integer(inv.get("trials"), "trials");
  if (trials < 2 || trials > 100000000) throw UsageError("--trials must be at least 2");
  cfg.trials = static_cast<int>(trials);

  try {
    cfg.strategy = parse_strategy(inv.get("strategy"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string& mode = inv.get("mode");
  if (mode == "match") {
    cfg.mode = SamplingMode::AnalyticMatching;
  } else if (mode == "realistic") {
    cfg.mode = SamplingMode::Realistic;
  } else {
    throw UsageError("--mode must be 'match' or 'realistic'");
  }
  cfg.randomize_middle = parse_bool(inv.get("randomize_middle"), "randomize-middle");
  if (inv.has("dir")) cfg.directory.file = inv.get("dir");
  const auto relays = parse_integer(inv.get("relays"), "relays");
  if (relays < 10) throw UsageError("--relays must be at least 10");
  cfg.directory.relays = static_cast<std::size_t>(relays);
  try {
    cfg.directory.bandwidth = BandwidthDist::parse(inv.get("bandwidth"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto guards = parse_integer(inv.get("guards"), "guards");
  if (guards < 1) throw UsageError("--guards must be positive");
  cfg.guard_count = static_cast<std::size_t>(guards);
  const auto threads = parse_integer(inv.get("threads"), "threads");
  if (threads < 0 || threads > 1024) throw UsageError("--threads must lie in [0, 1024]");
  cfg.threads = static_cast<unsigned>(threads);
  cfg.seed = inv.seed;
  return cfg;
}

struct KeyColumn {
  const char* name;
  std::function<std::string(const mc::GridPoint&)> value;
};

std::vector<KeyColumn> key_columns(const mc::ExperimentConfig& cfg) {
  // d and g are always present; other axes only when swept.
  std::vector<KeyColumn> cols;
  if (cfg.t.size() > 1) cols.push_back({"t", [](const mc::GridPoint& p) { return fmt(p.t); }});
  if (cfg.f.size() > 1) cols.push_back({"f", [](const mc::GridPoint& p) { return fmt(p.f); }});
  if (cfg.n.size() > 1)
    cols.push_back({"N", [](const mc::GridPoint& p) { return std::to_string(p.n); }});
  if (cfg.k.size() > 1)
    cols.push_back({"K", [](const mc::GridPoint& p) { return std::to_string(p.k); }});
  if (cfg.threshold.size() > 1)
    cols.push_back({"Th", [](const mc::GridPoint& p) { return std::to_string(p.threshold); }});
  cols.push_back({"d", [](const mc::GridPoint& p) { return fmt(p.d); }});
  cols.push_back({"g", [](const mc::GridPoint& p) { return fmt(p.g); }});
  return cols;
}

// Row order: by the key columns as printed.
std::vector<std::size_t> sorted_order(const mc::EstimateSeries& s) {
  std::vector<std::size_t> idx(s.points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto key = [&](std::size_t i) {
    const mc::GridPoint& p = s.points[i].point;
    return std::make_tuple(p.t, p.f, p.n, p.k, p.threshold, p.d, p.g);
  };
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return idx;
}

std::string header_of(const std::vector<KeyColumn>& cols, const std::string& rest) {
  std::string h;
  for (const KeyColumn& c : cols) h += std::string(c.name) + ",";
  return h + rest;
}

std::vector<std::string> keys_of(const std::vector<KeyColumn>& cols, const mc::GridPoint& p) {
  std::vector<std::string> row;
  for (const KeyColumn& c : cols) row.push_back(c.value(p));
  return row;
}

void emit_series(const Invocation& inv, const mc::ExperimentConfig& cfg,
                 const mc::EstimateSeries& s, Sink& sink) {
  const auto cols = key_columns(cfg);
  const auto order = sorted_order(s);
  auto base = inv.comments();
  base.push_back(describe(inv, {"t", "g", "f", "d", "N", "K", "Th", "trials", "strategy", "mode",
                                "randomize_middle", "dir", "relays", "bandwidth", "guards"}));
  base.push_back("strategy_run=" + std::string(to_string(s.strategy)));

  for (mc::Metric m : mc::kMetrics) {
    auto comments = base;
    comments.push_back("metric=" + std::string(to_string(m)));
    CsvTable table(comments, header_of(cols, "mean,ci95"));
    for (std::size_t i : order) {
      const mc::PointEstimate& p = s.points[i];
      auto row = keys_of(cols, p.point);
      if (p.error) {
        row.push_back("ERR");
        row.push_back("");
      } else {
        row.push_back(fmt(p[m].mean));
        row.push_back(fmt(p[m].half_width));
      }
      table.row(row);
    }
    sink.emit(std::string(to_string(m)) + ".csv", table.str());
  }

  auto comments = base;
  comments.push_back("raw counts summed over trials");
  CsvTable counts(comments,
                  header_of(cols,
                            "trials,survivors_cxc,survivors_hhh,survivors_others,live_cxc,"
                            "live_hhh,live_others,accepted_cxc,accepted_hhh,accepted_others,"
                            "attempts,network_failures,probes,fn_undefined,fp_undefined,error"));
  for (std::size_t i : order) {
    const mc::PointEstimate& p = s.points[i];
    const mc::TrialCounts& c = p.totals;
    auto row = keys_of(cols, p.point);
    for (std::uint64_t v :
         {static_cast<std::uint64_t>(cfg.trials), c.survivors.cxc, c.survivors.hhh,
          c.survivors.others, c.live.cxc, c.live.hhh, c.live.others, c.accepted.cxc,
          c.accepted.hhh, c.accepted.others, c.attempts, c.network_failures, c.probes,
          static_cast<std::uint64_t>(p[mc::Metric::FN].undefined),
          static_cast<std::uint64_t>(p[mc::Metric::FP].undefined)}) {
      row.push_back(std::to_string(v));
    }
    std::string error = p.error.value_or("");
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    row.push_back(error);
    counts.row(row);
  }
  sink.emit("counts.csv", counts.str());
}

void emit_comparison(const Invocation& inv, const mc::ExperimentConfig& cfg,
                     const mc::StrategyComparison& cmp, Sink& sink) {
  const auto cols = key_columns(cfg);
  const auto order = sorted_order(cmp.simple);
  auto comments = inv.comments();
  comments.push_back("redefined psi under both dropping strategies, shared seeds");
  CsvTable table(comments, header_of(cols, "psi_simple,ci95_simple,psi_shrewd,ci95_shrewd,diff"));
  for (std::size_t i : order) {
    const mc::PointEstimate& a = cmp.simple.points[i];
    const mc::PointEstimate& b = cmp.shrewd.points[i];
    auto row = keys_of(cols, a.point);
    if (a.error || b.error) {
      row.insert(row.end(), {"ERR", "", "ERR", "", ""});
    } else {
      const mc::Estimate& x = a[mc::Metric::Psi];
      const mc::Estimate& y = b[mc::Metric::Psi];
      row.insert(row.end(), {fmt(x.mean), fmt(x.half_width), fmt(y.mean), fmt(y.half_width),
                             fmt(x.mean - y.mean)});
    }
    table.row(row);
  }
  sink.emit("strategy_compare.csv", table.str());
}

int cmd_simulate(const Invocation& inv, Sink& sink, std::ostream& err) {
  mc::ExperimentConfig cfg = experiment_config(inv);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const mc::EstimateSeries* shown = nullptr;
  mc::StrategyComparison cmp;
  mc::EstimateSeries single;
  if (cfg.strategy == StrategyKind::Shrewd) {
    cmp = mc::compare_strategies(cfg);
    shown = &cmp.shrewd;
  } else {
    single = mc::run_experiment(cfg);
    shown = &single;
  }

  std::size_t failed = 0;
  for (const mc::PointEstimate& p : shown->points) {
    if (!p.error) continue;
    ++failed;
    err << "point t=" << fmt(p.point.t) << " g=" << fmt(p.point.g) << " d=" << fmt(p.point.d)
        << ": " << *p.error << '\n';
  }
  emit_series(inv, cfg, *shown, sink);
  if (cfg.strategy == StrategyKind::Shrewd) emit_comparison(inv, cfg, cmp, sink);
  finish(inv, sink, json{{"points", shown->points.size()}, {"failed_points", failed}});
  return 0;
}

// --------------------------------------------------------------- plumbing

struct FlagSpec {
  const char* key;
  const char* flag;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"t", "--t", "compromised bandwidth fraction (list or a:step:b for simulate)"},
    {"g", "--g", "compromised guard fraction; fractions like 1/3 accepted"},
    {"f", "--f", "network failure rate"},
    {"d", "--d", "adversary drop rate"},
    {"N", "--N", "phase-1 working circuits, or 'auto'"},
    {"K", "--K", "probes per circuit; lists and ranges like 1..10"},
    {"Th", "--Th", "acceptance threshold; lists, ranges, or 1..K"},
    {"trials", "--trials", "trials per grid point"},
    {"seed", "--seed", "master seed (random and printed when omitted)"},
    {"strategy", "--strategy", "none, simple or shrewd"},
    {"mode", "--mode", "match or realistic"},
    {"dir", "--dir", "relay directory CSV (synthetic when omitted)"},
    {"relays", "--relays", "synthetic directory size"},
    {"bandwidth", "--bandwidth", "synthetic bandwidth: pareto:SHAPE:SCALE, uniform:LO:HI, constant:V"},
    {"guards", "--guards", "guard set size"},
    {"threads", "--threads", "worker threads (0 = all cores); never changes results"},
    {"out", "--out", "output directory (stdout when omitted)"},
};

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective-DoS circuit probing simulator and closed-form model", "sdosim"};
  app.set_version_flag("--version", SDOSIM_VERSION);
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<CLI::Option*>> options;
  bool randomize_middle = false;
  std::vector<CLI::Option*> randomize_flags;
  std::string config_path;

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const Invocation&, Sink&, std::ostream&)> run;
  };
  const std::vector<Command> commands{
      {"analytic", "closed-form FN, FP, psi and eta over a (K, Th) grid", cmd_analytic},
      {"simulate", "Monte-Carlo sweep with one CSV per metric", cmd_simulate},
      {"crossover", "threshold where the FN and FP curves cross, per K", cmd_crossover},
      {"params", "phase-1 size and admissible (K, Th) ranges", cmd_params},
  };
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    for (const FlagSpec& f : kFlags) {
      options[f.key].push_back(sub->add_option(f.flag, values[f.key], f.help));
    }
    randomize_flags.push_back(
        sub->add_flag("--randomize-middle", randomize_middle, "randomize probe middles"));
    sub->add_option("--config", config_path, "key = value settings file; flags override it");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << SDOSIM_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sdosim: " << e.what() << '\n';
    err << "run 'sdosim --help' for usage\n";
    return 1;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const auto cmd = std::find_if(commands.begin(), commands.end(),
                                [&](const Command& c) { return name == c.name; });

  try {
    Invocation inv;
    inv.command = name;
    inv.raw = defaults_for(name);
    if (!config_path.empty()) {
      for (const auto& [k, v] : load_config(config_path)) inv.raw[k] = v;
    }
    for (const auto& [key, opts] : options) {
      for (const CLI::Option* o : opts) {
        if (o->count() > 0) {
          inv.raw[key] = values[key];
        }
      }
    }
    for (const CLI::Option* o : randomize_flags) {
      if (o->count() > 0 && randomize_middle) inv.raw["randomize_middle"] = "true";
    }

    if (inv.has("seed")) {
      inv.seed = static_cast<std::uint64_t>(parse_integer(inv.get("seed"), "seed"));
    } else {
      inv.seed = random_seed();
      err << "sdosim: no --seed given, using seed " << inv.seed << '\n';
    }
    std::string canonical = name + "\n";
    for (const auto& [k, v] : inv.raw) {
      if (affects_results(k)) canonical += k + "=" + v + "\n";
    }
    inv.config_hash = fnv1a(canonical);

    std::optional<std::filesystem::path> out_dir;
    if (inv.has("out")) out_dir = inv.get("out");
    Sink sink(out_dir, out);
    return cmd->run(inv, sink, err);
  } catch (const UsageError& e) {
    err << "sdosim " << name << ": " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "sdosim " << name << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "sdosim " << name << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sdosim::cli
