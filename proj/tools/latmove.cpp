#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "latmove/latmove.hpp"

namespace fs = std::filesystem;
using namespace latmove;

namespace {

struct SpecSource {
  std::string spec_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> realizations;

  void add_to(CLI::App* cmd) {
    auto* s = cmd->add_option("--spec", spec_file, "experiment spec JSON")->check(CLI::ExistingFile);
    auto* p = cmd->add_option("--preset", preset, "built-in scenario name");
    s->excludes(p);
    cmd->add_option("--seed", seed, "master seed (overrides the spec)");
    cmd->add_option("--samples", samples, "Monte Carlo traces per score (overrides the spec)");
    cmd->add_option("--realizations", realizations, "attack and benign realizations each");
  }

  ExperimentSpec load() const {
    ExperimentSpec s;
    if (!spec_file.empty()) {
      std::ifstream in(spec_file);
      s = spec_from_json(nlohmann::json::parse(in), fs::path(spec_file).parent_path());
    } else if (!preset.empty()) {
      s = scenario_spec(preset);
    } else {
      throw CLI::ValidationError("one of --spec or --preset is required");
    }
    if (seed) s.seed = RngSeed{*seed};
    if (samples) s.n_samples = *samples;
    if (realizations) s.n_attack = s.n_benign = *realizations;
    if (auto why = check_spec(s); !why.empty()) throw std::invalid_argument(why);
    return s;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

nlohmann::json score_json(const DetectorScore& s) {
  return {{"baseline_ll", s.baseline_ll.value}, {"attack_ll", s.attack_ll.value},
          {"log_lr", s.log_lr},                 {"ess", s.ess},
          {"n_truncated", s.n_truncated},       {"degenerate", s.degenerate},
          {"off_model_events", s.baseline_ll.off_model_events}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lateral-movement detection: simulation, likelihood-ratio scoring, ROC experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t workers = 1;
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one realization of a spec");
  SpecSource sim_src;
  sim_src.add_to(sim);
  bool benign = false;
  std::string sim_out = "sim";
  sim->add_flag("--benign", benign, "no attacker");
  sim->add_option("--out", sim_out, "output directory");

  // score
  auto* sc = app.add_subcommand("score", "score a dataset with both detectors");
  SpecSource sc_src;
  sc_src.add_to(sc);
  std::string data_file, sc_out;
  sc->add_option("--data", data_file, "dataset CSV (time,src,dst)")->required()->check(CLI::ExistingFile);
  sc->add_option("--out", sc_out, "write the score JSON here instead of stdout");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run ROC experiments");
  SpecSource ex_src;
  ex_src.add_to(ex);
  bool all = false, list = false;
  std::string ex_out = "results", auth_log;
  RealExperimentOptions real;
  ex->add_flag("--all", all, "run every built-in scenario");
  ex->add_flag("--list", list, "list built-in scenarios");
  ex->add_option("--out", ex_out, "output directory");
  ex->add_option("--auth-log", auth_log, "build the network from an authentication log")
      ->check(CLI::ExistingFile);
  ex->add_option("--entries", real.n_entries, "entry nodes sampled from the log network");
  ex->add_option("--fraction", real.malicious_fraction, "malicious increment / benign rate");
  ex->add_option("--hour-start", real.extraction.hour_start, "first second of the hour slice");

  // ingest
  auto* in = app.add_subcommand("ingest", "extract a host network from an authentication log");
  std::string in_log, in_out = "ingest";
  ExtractionConfig cfg;
  double fraction = 0.10;
  in->add_option("--auth-log", in_log, "user,computer,time lines")->required()->check(CLI::ExistingFile);
  in->add_option("--out", in_out, "output directory");
  in->add_option("--hour-start", cfg.hour_start, "first second of the hour slice");
  in->add_option("--min-in", cfg.min_in, "keep hosts receiving more than this");
  in->add_option("--min-out", cfg.min_out, "keep hosts sending more than this");
  in->add_option("--fraction", fraction, "malicious increment / benign rate");
  in->add_flag("!--chain-pairs", cfg.chain_pairs, "pair every same-second login, not just consecutive ones");

  // summarize
  auto* su = app.add_subcommand("summarize", "tabulate report.json files under a directory");
  std::string su_dir = "results";
  su->add_option("--out", su_dir, "directory holding experiment outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const ExperimentSpec s = sim_src.load();
      const ObservationWindow w(s.horizon);
      const SimulationResult r =
          benign ? simulate_benign(s.generator_model, w, s.seed)
                 : simulate_attack_schedule(s.generator_model, s.generator_model.require_node(s.entry), w,
                                            s.schedule, s.seed);
      const fs::path dir = sim_out;
      open_out(dir / "model.json") << to_json(s.generator_model).dump(2) << '\n';
      auto d = open_out(dir / "dataset.csv");
      write_dataset_csv(d, r.dataset, s.generator_model);
      if (r.attack) {
        auto t = open_out(dir / "trace.csv");
        write_trace_csv(t, r.trace, s.generator_model);
      }
      std::cout << r.dataset.size() << " messages, " << r.trace.size() << " compromised nodes -> "
                << dir.string() << '\n';
    } else if (*sc) {
      const ExperimentSpec s = sc_src.load();
      DetectorConfig det = realization_detector(s, 0);
      det.seed = s.seed;
      det.workers = workers;
      std::ifstream f(data_file);
      const Dataset data = read_dataset_csv(f, det.detector_model);
      const std::string out = score_json(score(det, data, ObservationWindow(s.horizon))).dump(2);
      if (sc_out.empty())
        std::cout << out << '\n';
      else
        open_out(sc_out) << out << '\n';
    } else if (*ex) {
      if (list) {
        for (const auto& n : scenario_names()) std::cout << n << '\n';
        return 0;
      }
      const fs::path dir = ex_out;
      std::vector<ExperimentSpec> specs;
      if (all) {
        for (const auto& n : scenario_names()) {
          SpecSource one = ex_src;
          one.preset = n;
          specs.push_back(one.load());
        }
      } else {
        specs.push_back(ex_src.load());
      }
      for (const auto& s : specs) {
        std::vector<ExperimentReport> reports;
        if (!auth_log.empty()) {
          std::ifstream log(auth_log);
          reports = run_real_experiment(log, real, s, {dir / s.name, workers});
        } else {
          reports.push_back(run_experiment(s, {dir / s.name, workers}));
        }
        for (const auto& r : reports)
          std::cout << r.name << ": AUC LR " << r.dominance.auc_lr << ", anomaly "
                    << r.dominance.auc_anomaly << ", 95% CI of difference [" << r.dominance.ci_low
                    << ", " << r.dominance.ci_high << "]\n";
      }
    } else if (*in) {
      std::ifstream f(in_log);
      const AuthLog log = parse_auth_log(f);
      for (const auto& m : log.malformed)
        std::cerr << in_log << ":" << m.line << ": " << m.reason << ": " << m.text << '\n';
      const auto events = infer_edges(log.records, cfg);
      const ExtractionResult r = extract_subgraph(events, cfg);
      const fs::path dir = in_out;
      auto e = open_out(dir / "edges.csv");
      e << "time,src,dst\n";
      for (const auto& m : events) e << m.time << ',' << m.src << ',' << m.dst << '\n';
      std::cout << log.records.size() << " records, " << log.malformed.size() << " malformed, "
                << events.size() << " inferred messages; " << r.report << '\n';
      if (r.empty) return 2;
      open_out(dir / "model.json") << to_json(attach_attack_rates(r.model, fraction)).dump(2) << '\n';
      auto h = open_out(dir / "rate_histogram.csv");
      write_rate_histogram_csv(h, r.model);
    } else if (*su) {
      const auto rows = summarize(su_dir);
      write_summary_csv(std::cout, rows);
      auto f = open_out(fs::path(su_dir) / "summary.csv");
      write_summary_csv(f, rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
