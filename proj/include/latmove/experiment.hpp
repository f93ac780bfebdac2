#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "latmove/dataset.hpp"
#include "latmove/detector.hpp"
#include "latmove/ingest.hpp"
#include "latmove/model.hpp"
#include "latmove/parallel.hpp"
#include "latmove/roc.hpp"
#include "latmove/rng.hpp"
#include "latmove/schedule.hpp"
#include "latmove/simulator.hpp"
#include "latmove/topology.hpp"

namespace latmove {

/// Everything needed to reproduce one ROC comparison.
struct ExperimentSpec {
  std::string name = "experiment";
  NetworkModel generator_model;
  std::optional<NetworkModel> detector_base;  // defaults to the generator model
  MisspecificationTransform detector_transform = NoMisspecification{};
  bool noise_per_realization = false;  // redraw the transform's noise for every realization
  std::string entry;
  double horizon = 1.0;
  std::size_t n_attack = 200;
  std::size_t n_benign = 200;
  AttackSchedule schedule;
  bool detector_uses_schedule = true;
  std::size_t n_samples = 10000;
  LikelihoodForm likelihood_form = LikelihoodForm::event_time;
  std::size_t n_boot = 1000;
  RngSeed seed{1};
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: no files written
  std::size_t workers = 1;
};

struct RealizationScore {
  std::size_t realization = 0;
  bool attack = false;
  DetectorScore score;
};

struct ExperimentReport {
  std::string name;
  std::vector<RealizationScore> rows;
  RocCurve roc_lr;
  RocCurve roc_anomaly;
  DominanceReport dominance;
};

// ---------------------------------------------------------------------------
// Spec (de)serialization

inline nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json j{{"name", s.name},
                   {"generator", {{"model", to_json(s.generator_model)}}},
                   {"detector_transform", to_json(s.detector_transform)},
                   {"noise_per_realization", s.noise_per_realization},
                   {"entry", s.entry},
                   {"horizon", s.horizon},
                   {"n_attack", s.n_attack},
                   {"n_benign", s.n_benign},
                   {"schedule", to_json(s.schedule)},
                   {"detector_uses_schedule", s.detector_uses_schedule},
                   {"n_samples", s.n_samples},
                   {"likelihood_form", to_string(s.likelihood_form)},
                   {"n_boot", s.n_boot},
                   {"seed", s.seed.value}};
  if (s.detector_base) j["detector_model"] = to_json(*s.detector_base);
  return j;
}

namespace detail {

inline NetworkModel read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return model_from_json(nlohmann::json::parse(in));
}

/// {"model": {...}} | {"model_file": path} |
/// {"preset": {"kind", "sizes", "malicious_increment", "edge_increments": [[src,dst,rate],...]}}
inline NetworkModel resolve_model_source(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  if (j.contains("model")) return model_from_json(j["model"]);
  if (j.contains("model_file")) {
    std::filesystem::path p = j["model_file"].get<std::string>();
    return read_model_file(p.is_absolute() ? p : base_dir / p);
  }
  if (j.contains("preset")) {
    const auto& p = j["preset"];
    NetworkModel m = preset_topology(p.at("kind").get<std::string>(), p.at("sizes").get<std::vector<int>>());
    m = with_uniform_increment(std::move(m), p.value("malicious_increment", 0.0));
    for (const auto& e : p.value("edge_increments", nlohmann::json::array()))
      m = with_edge_increments(std::move(m), {{e.at(0).get<std::string>(), e.at(1).get<std::string>()}},
                               e.at(2).get<double>());
    return m;
  }
  throw std::invalid_argument("generator needs one of model, model_file or preset");
}

}  // namespace detail

inline ExperimentSpec spec_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {}) {
  ExperimentSpec s;
  s.name = j.value("name", s.name);
  s.generator_model = detail::resolve_model_source(j.at("generator"), base_dir);
  if (j.contains("detector_model")) s.detector_base = model_from_json(j["detector_model"]);
  if (j.contains("detector_transform"))
    s.detector_transform = transform_from_json(j["detector_transform"]);
  s.noise_per_realization = j.value("noise_per_realization", false);
  s.entry = j.at("entry").get<std::string>();
  s.horizon = j.at("horizon").get<double>();
  s.n_attack = j.value("n_attack", s.n_attack);
  s.n_benign = j.value("n_benign", s.n_benign);
  if (j.contains("schedule")) s.schedule = schedule_from_json(j["schedule"]);
  s.detector_uses_schedule = j.value("detector_uses_schedule", true);
  s.n_samples = j.value("n_samples", s.n_samples);
  s.likelihood_form = likelihood_form_from_string(j.value("likelihood_form", "event_time"));
  s.n_boot = j.value("n_boot", s.n_boot);
  s.seed = RngSeed{j.value("seed", s.seed.value)};
  return s;
}

/// Empty string when the spec can run.
inline std::string check_spec(const ExperimentSpec& s) {
  if (s.n_attack == 0 || s.n_benign == 0) return "realization counts must be at least 1";
  if (s.n_samples == 0) return "n_samples must be at least 1";
  if (!(s.horizon > 0.0)) return "horizon must be positive";
  if (auto r = validate_model(s.generator_model); !r.ok()) return r.violations.front().message;
  if (!s.generator_model.find_node(s.entry)) return "entry node not in generator model";
  if (s.detector_base) {
    if (auto r = validate_model(*s.detector_base); !r.ok()) return r.violations.front().message;
    if (!s.detector_base->find_node(s.entry)) return "entry node not in detector model";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Running

inline void write_scores_csv(std::ostream& os, const std::vector<RealizationScore>& rows) {
  os << "realization,label,baseline_ll,attack_ll,log_lr,ess,n_truncated\n";
  for (const auto& r : rows) {
    os << r.realization << ',' << (r.attack ? "attack" : "benign") << ','
       << detail::format_double(r.score.baseline_ll.value) << ','
       << detail::format_double(r.score.attack_ll.value) << ','
       << detail::format_double(r.score.log_lr) << ',' << detail::format_double(r.score.ess) << ','
       << r.score.n_truncated << '\n';
  }
}

inline nlohmann::json report_json(const ExperimentReport& r) {
  nlohmann::json j = to_json(r.dominance);
  j["experiment"] = r.name;
  j["n_attack"] = std::count_if(r.rows.begin(), r.rows.end(), [](auto& x) { return x.attack; });
  j["n_benign"] = std::count_if(r.rows.begin(), r.rows.end(), [](auto& x) { return !x.attack; });
  return j;
}

/// Realization i: benign for i < n_benign, attack afterwards.
inline SimulationResult simulate_realization(const ExperimentSpec& spec, std::size_t i) {
  const ObservationWindow window(spec.horizon);
  const RngSeed seed = derive_seed(spec.seed, "realization", i);
  if (i < spec.n_benign) return simulate_benign(spec.generator_model, window, seed);
  return simulate_attack_schedule(spec.generator_model, spec.generator_model.require_node(spec.entry),
                                  window, spec.schedule, seed);
}

/// Detector used on realization i (the transform's noise is drawn once per
/// experiment unless noise_per_realization is set).
inline DetectorConfig realization_detector(const ExperimentSpec& spec, std::size_t i) {
  const NetworkModel& base = spec.detector_base ? *spec.detector_base : spec.generator_model;
  DetectorConfig cfg;
  cfg.detector_model = apply_misspecification(
      base, spec.detector_transform,
      derive_seed(spec.seed, "noise", spec.noise_per_realization ? i + 1 : 0));
  cfg.entry = base.require_node(spec.entry);
  cfg.n_samples = spec.n_samples;
  cfg.seed = derive_seed(spec.seed, "estimator", i);
  if (spec.detector_uses_schedule) cfg.schedule = spec.schedule;
  cfg.form = spec.likelihood_form;
  return cfg;
}

/// Simulates n_benign benign then n_attack attack realizations (indices in
/// that order), scores each with both detectors, and builds the ROC
/// comparison. Output depends only on the spec, not on the worker count.
inline ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {}) {
  if (auto why = check_spec(spec); !why.empty()) throw std::invalid_argument(why);
  const ObservationWindow window(spec.horizon);
  const std::size_t total = spec.n_benign + spec.n_attack;
  ExperimentReport report;
  report.name = spec.name;
  report.rows.resize(total);
  parallel_for(total, options.workers, [&](std::size_t i) {
    const SimulationResult sim = simulate_realization(spec, i);
    report.rows[i] = {i, sim.attack, score(realization_detector(spec, i), sim.dataset, window)};
  });

  LabeledScores lr, anomaly;
  for (const auto& r : report.rows) {
    (r.attack ? lr.attack : lr.benign).push_back(r.score.log_lr);
    (r.attack ? anomaly.attack : anomaly.benign).push_back(r.score.baseline_ll.value);
  }
  report.roc_lr = roc_curve(lr);
  report.roc_anomaly = roc_curve(anomaly);
  report.dominance = dominance_report(lr, anomaly, spec.n_boot, derive_seed(spec.seed, "bootstrap", 0));

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    auto open = [&](const char* name) {
      std::ofstream f(options.out_dir / name);
      if (!f) throw std::runtime_error("cannot write " + (options.out_dir / name).string());
      return f;
    };
    {
      auto f = open("scores.csv");
      write_scores_csv(f, report.rows);
    }
    {
      auto f = open("roc_lr.csv");
      write_roc_csv(f, report.roc_lr);
    }
    {
      auto f = open("roc_anomaly.csv");
      write_roc_csv(f, report.roc_anomaly);
    }
    open("report.json") << report_json(report).dump(2) << '\n';
    open("spec.json") << to_json(spec).dump(2) << '\n';
  }
  return report;
}

// ---------------------------------------------------------------------------
// Scenario presets

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{
      "experiment1",     "experiment2",     "experiment3",     "experiment4a",
      "experiment4b",    "experiment4c",    "experiment5",     "misspec_broaden",
      "misspec_noise_10", "misspec_noise_20", "misspec_noise_30", "misspec_center_only"};
  return names;
}

namespace detail {

inline constexpr int star_leaves = 4;
inline constexpr int larger_length = 4, larger_legs = 2;  // stand-in "larger network"
inline constexpr int goal_paths_n = 3, goal_path_len = 2;
inline constexpr int caterpillar_length = 4, caterpillar_legs = 2;

/// Center chain at 0.5, every other edge at 0.25.
inline NetworkModel caterpillar_attack_model() {
  NetworkModel m = with_uniform_increment(caterpillar_topology(caterpillar_length, caterpillar_legs), 0.25);
  return with_edge_increments(std::move(m), caterpillar_center_edges(caterpillar_length), 0.5);
}

}  // namespace detail

inline ExperimentSpec scenario_spec(std::string_view name) {
  using namespace detail;
  ExperimentSpec s;
  s.name = std::string(name);
  if (name == "experiment1") {
    s.generator_model = with_uniform_increment(star_topology(star_leaves), 0.03);
    s.entry = "A";
    s.horizon = 1500;
  } else if (name == "experiment2") {
    s.generator_model = with_uniform_increment(star_topology(star_leaves), 0.03);
    s.schedule = AttackSchedule{{0.03, 0.06}, 0.0, true};
    s.entry = "A";
    s.horizon = 400;
  } else if (name == "experiment3") {
    s.generator_model = with_uniform_increment(star_topology(star_leaves), 0.5);
    s.entry = "A";
    s.horizon = 10;
  } else if (name == "experiment4a") {
    s.generator_model = with_uniform_increment(caterpillar_topology(larger_length, larger_legs), 0.03);
    s.entry = "C1";
    s.horizon = 800;
  } else if (name == "experiment4b") {
    s.generator_model = with_uniform_increment(caterpillar_topology(larger_length, larger_legs), 0.03);
    s.schedule = AttackSchedule{{0.03, 0.06}, 0.0, true};
    s.entry = "C1";
    s.horizon = 50;
  } else if (name == "experiment4c") {
    NetworkModel m = caterpillar_topology(larger_length, larger_legs);
    m.transform_params([&](const Edge& e, EdgeParams& p) {
      p.malicious_increment = (m.out_edges(e.src).size() > 2 ? 0.10 : 0.50) * p.benign_rate;
    });
    s.generator_model = std::move(m);
    s.entry = "C1";
    s.horizon = 10;
  } else if (name == "experiment5") {
    s.generator_model = with_uniform_increment(goal_paths_topology(goal_paths_n, goal_path_len), 0.05);
    s.schedule = AttackSchedule{{0.05}, 0.05, false};
    s.entry = "A";
    s.horizon = 12;
  } else if (name == "misspec_broaden") {
    const NetworkModel topo = goal_paths_topology(goal_paths_n, goal_path_len);
    s.generator_model = with_edge_increments(topo, goal_path_edges(2, goal_path_len), 0.5);
    EdgeLabels all;
    for (const Edge& e : topo.edges()) all.emplace_back(topo.label(e.src), topo.label(e.dst));
    s.detector_transform = PathBroaden{all, 0.5};
    s.entry = "A";
    s.horizon = 10;
  } else if (name.starts_with("misspec_noise_")) {
    const int pct = std::stoi(std::string(name.substr(14)));
    if (pct != 10 && pct != 20 && pct != 30) throw std::invalid_argument("unknown scenario");
    s.generator_model = caterpillar_attack_model();
    s.detector_transform = GaussianNoise{pct / 100.0};
    s.entry = "C1";
    s.horizon = 10;
  } else if (name == "misspec_center_only") {
    s.generator_model = caterpillar_attack_model();
    s.detector_transform = PathRestrict{caterpillar_center_edges(caterpillar_length)};
    s.entry = "C1";
    s.horizon = 10;
  } else {
    throw std::invalid_argument("unknown scenario: " + std::string(name));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Log-derived networks

struct RealExperimentOptions {
  ExtractionConfig extraction;
  double malicious_fraction = 0.10;
  std::size_t n_entries = 5;
  RngSeed entry_seed{7};
  double horizon_minutes = 60.0;
};

/// Parsed log -> extracted subgraph -> attack rates -> uniformly sampled
/// entry nodes, one experiment per entry. `base` supplies counts, sample
/// sizes and the master seed.
inline std::vector<ExperimentReport> run_real_experiment(std::istream& log,
                                                         const RealExperimentOptions& opts,
                                                         const ExperimentSpec& base,
                                                         const RunOptions& run = {}) {
  const AuthLog parsed = parse_auth_log(log);
  const ExtractionResult ex = extract_subgraph(infer_edges(parsed.records, opts.extraction), opts.extraction);
  if (ex.empty) throw std::runtime_error("empty extracted graph: " + ex.report);
  const NetworkModel model = attach_attack_rates(ex.model, opts.malicious_fraction);

  std::vector<std::uint32_t> nodes(model.node_count());
  std::iota(nodes.begin(), nodes.end(), 0u);
  SplitMix64 rng(opts.entry_seed);
  const std::size_t k = std::min(opts.n_entries, nodes.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(nodes.size() - i));
    std::swap(nodes[i], nodes[j]);
  }

  std::vector<ExperimentReport> reports;
  for (std::size_t i = 0; i < k; ++i) {
    ExperimentSpec spec = base;
    spec.generator_model = model;
    spec.detector_base.reset();
    spec.entry = model.label(NodeId{nodes[i]});
    spec.horizon = opts.horizon_minutes;
    spec.name = base.name + "_entry" + std::to_string(i + 1);
    RunOptions r = run;
    if (!r.out_dir.empty()) r.out_dir /= spec.name;
    reports.push_back(run_experiment(spec, r));
  }
  if (!run.out_dir.empty()) {
    std::filesystem::create_directories(run.out_dir);
    std::ofstream(run.out_dir / "model.json") << to_json(model).dump(2) << '\n';
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Summary table

struct SummaryRow {
  std::string experiment;
  double auc_lr = 0.0;
  double auc_anomaly = 0.0;
  bool dominance_low_fpr = false;
  bool no_worse_everywhere = false;
};

/// Collects every report.json under `dir`, sorted by experiment name.
inline std::vector<SummaryRow> summarize(const std::filesystem::path& dir) {
  std::vector<SummaryRow> rows;
  if (!std::filesystem::exists(dir)) return rows;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "report.json") continue;
    std::ifstream in(entry.path());
    const auto j = nlohmann::json::parse(in);
    rows.push_back({j.value("experiment", entry.path().parent_path().filename().string()),
                    j.at("auc_lr").get<double>(), j.at("auc_anomaly").get<double>(),
                    j.value("dominance_low_fpr", false), j.value("no_worse_everywhere", false)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const SummaryRow& a, const SummaryRow& b) { return a.experiment < b.experiment; });
  return rows;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "experiment,auc_lr,auc_anomaly,dominance_fpr_lt_0.05,no_worse_everywhere\n";
  for (const auto& r : rows)
    os << r.experiment << ',' << detail::format_double(r.auc_lr) << ','
       << detail::format_double(r.auc_anomaly) << ',' << (r.dominance_low_fpr ? "true" : "false")
       << ',' << (r.no_worse_everywhere ? "true" : "false") << '\n';
}

}  // namespace latmove
