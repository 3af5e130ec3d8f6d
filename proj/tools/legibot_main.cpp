#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "legibot/errors.hpp"
#include "legibot/numfmt.hpp"
#include "legibot/render.hpp"
#include "legibot/sim.hpp"
#include "legibot/stats.hpp"

namespace {

using nlohmann::json;

legibot::ScenarioSpec resolve_scenario(const std::string& name_or_path) {
  if (auto builtin = legibot::find_builtin_scenario(name_or_path)) return *builtin;
  if (std::filesystem::exists(name_or_path)) return legibot::load_scenario(name_or_path);
  throw legibot::ValidationError("unknown scenario '" + name_or_path +
                                 "' (not a built-in name or a readable file)");
}

legibot::CueType cue_type_arg(const std::string& s) {
  if (auto t = legibot::parse_cue_type(s)) return *t;
  throw legibot::ValidationError("unknown cue type '" + s + "'");
}

legibot::CueMode cue_mode_arg(const std::string& s) {
  if (auto m = legibot::parse_cue_mode(s)) return *m;
  throw legibot::ValidationError("unknown cue mode '" + s + "'");
}

legibot::MovementScenario scenario_arg(const std::string& s) {
  if (s == "turn") return legibot::MovementScenario::Turn;
  if (s == "straight") return legibot::MovementScenario::Straight;
  throw legibot::ValidationError("unknown scenario name '" + s + "'");
}

legibot::Verdict verdict_arg(const std::string& s) {
  if (s == "comprehension") return legibot::Verdict::Comprehension;
  if (s == "lack") return legibot::Verdict::Lack;
  if (s == "indeterminate") return legibot::Verdict::Indeterminate;
  if (s == "n/a") return legibot::Verdict::NotApplicable;
  throw legibot::ValidationError("unknown verdict '" + s + "'");
}

struct SimulateArgs {
  std::string scenario;
  std::string cue = "none";
  std::string mode = "none";
  std::string out;
  double dt = 0.05;
  std::uint64_t seed = 0;
  int replan_every = 0;
};

int cmd_simulate(const SimulateArgs& args) {
  const legibot::ScenarioSpec spec = resolve_scenario(args.scenario);
  legibot::SimConfig cfg;
  cfg.dt = args.dt;
  cfg.cue_type = cue_type_arg(args.cue);
  cfg.cue_mode = cue_mode_arg(args.mode);
  cfg.seed = args.seed;
  cfg.replan_every = args.replan_every;

  const legibot::Trace trace = legibot::run(spec, cfg);
  legibot::write_trace(trace, args.out);

  int paused = 0, path_samples = 0, goal_samples = 0, lit_samples = 0;
  for (const auto& r : trace.records) {
    paused += r.paused ? 1 : 0;
    path_samples += r.cue.active_source == legibot::CueSource::Path ? 1 : 0;
    goal_samples += r.cue.active_source == legibot::CueSource::Goal ? 1 : 0;
    const bool lights_on = r.cue.lights.any_active() && r.cue.lights.lit;
    const bool arrow_on = r.cue.arrow.visible && r.cue.arrow.lit;
    lit_samples += (lights_on || arrow_on) ? 1 : 0;
  }
  const double duration = trace.records.empty() ? 0.0 : trace.records.back().t;
  std::cout << "wrote " << args.out << ": " << trace.records.size() << " records over "
            << legibot::fmt_fixed(duration) << " s\n";
  std::cout << "pause: " << paused << " records\n";
  std::cout << "cue samples: path " << path_samples << ", goal " << goal_samples << ", lit "
            << lit_samples << "\n";
  return 0;
}

struct RenderArgs {
  std::string trace;
  std::string scenario;  // optional override of the trace header name
  std::string format = "frames";
  std::string out_dir;
  int stride = 1;
  std::string report;
  std::string chart = "sas";
  std::string out;
};

json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw legibot::ValidationError(std::string(what) + ": cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw legibot::ValidationError(std::string(what) + ": " + path + ": " + e.what());
  }
}

std::string chart_from_report(const std::string& path, const std::string& chart) {
  const json j = parse_json_file(path, "report");
  try {
    if (chart == "sas") {
      std::vector<legibot::ConditionSummary> summary;
      for (const auto& cell : j.at("sas_summary")) {
        legibot::ConditionSummary s;
        s.scenario = scenario_arg(cell.at("scenario").get<std::string>());
        s.cue_type = cue_type_arg(cell.at("cue_type").get<std::string>());
        s.cue_mode = cue_mode_arg(cell.at("cue_mode").get<std::string>());
        s.n = cell.at("n").get<int>();
        s.mean = cell.at("mean").get<double>();
        s.sd = cell.at("sd").get<double>();
        s.ci_half_width = cell.at("ci_half_width").get<double>();
        summary.push_back(s);
      }
      return legibot::plot_condition_means(summary);
    }
    std::vector<legibot::ComprehensionCell> cells;
    for (const auto& cell : j.at("comprehension")) {
      legibot::ComprehensionCell c;
      c.scenario = scenario_arg(cell.at("scenario").get<std::string>());
      c.cue_type = cue_type_arg(cell.at("cue_type").get<std::string>());
      c.cue_mode = cue_mode_arg(cell.at("cue_mode").get<std::string>());
      c.n = cell.at("n").get<int>();
      c.mean_path_statement = cell.at("mean_path_statement").get<double>();
      c.mean_goal_statement = cell.at("mean_goal_statement").get<double>();
      c.diff = cell.at("diff").get<double>();
      for (const auto& [field, q] :
           {std::pair{"path_quartiles", &c.path_quartiles},
            std::pair{"goal_quartiles", &c.goal_quartiles}}) {
        const json& src = cell.at(field);
        q->q1 = src.at("q1").get<double>();
        q->median = src.at("median").get<double>();
        q->q3 = src.at("q3").get<double>();
      }
      c.path_verdict = verdict_arg(cell.at("path_verdict").get<std::string>());
      c.goal_verdict = verdict_arg(cell.at("goal_verdict").get<std::string>());
      cells.push_back(c);
    }
    return legibot::plot_comprehension(cells);
  } catch (const json::exception& e) {
    throw legibot::ValidationError("report: " + path + ": " + e.what());
  }
}

int cmd_render(const RenderArgs& args) {
  if (!args.trace.empty()) {
    const legibot::Trace trace = legibot::read_trace(args.trace);
    const std::string scenario_name =
        args.scenario.empty() ? trace.header.scenario : args.scenario;
    const legibot::ScenarioSpec spec = resolve_scenario(scenario_name);
    legibot::RenderStyle style;
    style.frame_stride = args.stride;
    const std::vector<std::string> written =
        legibot::render_animation(trace, spec, args.out_dir, args.format, style);
    std::cout << "wrote " << written.size() << (written.size() == 1 ? " file" : " files")
              << " to " << args.out_dir << "\n";
    return 0;
  }

  const std::string svg = chart_from_report(args.report, args.chart);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw legibot::RuntimeError("cannot write " + args.out);
  out << svg;
  if (!out) throw legibot::RuntimeError("failed writing " + args.out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string responses;
  bool synth = false;
  int participants = 289;
  int failures = 60;
  std::uint64_t seed = 7;
  std::string out;
  std::string dump_csv;  // optional copy of the analyzed responses
};

int cmd_analyze(const AnalyzeArgs& args) {
  std::vector<legibot::ResponseRecord> records;
  if (args.synth) {
    records = legibot::synth_responses(
        legibot::default_synth_spec(args.participants, args.failures, args.seed));
  } else {
    records = legibot::ingest(args.responses);
  }
  if (!args.dump_csv.empty()) legibot::write_responses(records, args.dump_csv);

  const legibot::AnalysisReport report = legibot::analyze_responses(records);
  legibot::write_report(report, args.out);

  std::cout << "wrote " << args.out << ": " << report.participants_retained << " of "
            << report.participants_total << " participants retained ("
            << report.participants_excluded << " excluded)\n";
  std::cout << "scale reliability: min alpha " << legibot::fmt_fixed(report.min_alpha, 3)
            << " across " << report.reliability.size() << " cells\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic motion-legibility cue simulator and survey analysis toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Run a scenario and write a trace");
  sim->add_option("--scenario", sim_args.scenario, "Built-in name (turn, straight) or file path")
      ->required();
  sim->add_option("--cue", sim_args.cue, "Cue type")
      ->check(CLI::IsMember({"arrows", "lights", "none"}));
  sim->add_option("--mode", sim_args.mode, "Cue mode")
      ->check(CLI::IsMember({"path", "goal", "path_goal", "none"}));
  sim->add_option("--out", sim_args.out, "Trace output path")->required();
  sim->add_option("--dt", sim_args.dt, "Tick length in seconds");
  sim->add_option("--seed", sim_args.seed, "Seed recorded in the trace header");
  sim->add_option("--replan-every", sim_args.replan_every,
                  "Replan period in ticks (0 plans once per leg)");

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand("render", "Render a trace or a report chart");
  render->add_option("--trace", render_args.trace, "Trace file to animate");
  render->add_option("--scenario", render_args.scenario,
                     "Scenario override when the trace header names a moved file");
  render->add_option("--format", render_args.format, "Animation output format")
      ->check(CLI::IsMember({"frames", "gif"}));
  render->add_option("--out-dir", render_args.out_dir, "Directory for animation output");
  render->add_option("--stride", render_args.stride, "Records per emitted frame")
      ->check(CLI::PositiveNumber);
  render->add_option("--report", render_args.report, "Analysis report to chart");
  render->add_option("--chart", render_args.chart, "Chart kind")
      ->check(CLI::IsMember({"sas", "comprehension"}));
  render->add_option("--out", render_args.out, "Chart output path (SVG)");

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand("analyze", "Run the survey analysis pipeline");
  analyze->add_option("--responses", analyze_args.responses, "Responses CSV path");
  CLI::Option* synth_flag = analyze->add_flag("--synth", analyze_args.synth,
                                              "Analyze a generated synthetic dataset");
  analyze->add_option("--participants", analyze_args.participants, "Synthetic participant count")
      ->needs(synth_flag)
      ->check(CLI::PositiveNumber);
  analyze->add_option("--failures", analyze_args.failures,
                      "Planted attention-check failures")
      ->needs(synth_flag)
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--seed", analyze_args.seed, "Synthetic dataset seed")->needs(synth_flag);
  analyze->add_option("--dump-csv", analyze_args.dump_csv,
                      "Also write the analyzed responses as CSV")
      ->needs(synth_flag);
  analyze->add_option("--out", analyze_args.out, "Report output path (JSON)")->required();

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(render)) {
      if (render_args.trace.empty() == render_args.report.empty())
        throw CLI::ValidationError("render", "exactly one of --trace or --report is required");
      if (!render_args.trace.empty() && render_args.out_dir.empty())
        throw CLI::ValidationError("render", "--trace requires --out-dir");
      if (!render_args.report.empty() && render_args.out.empty())
        throw CLI::ValidationError("render", "--report requires --out");
    }
    if (app.got_subcommand(analyze)) {
      if (analyze_args.synth == !analyze_args.responses.empty())
        throw CLI::ValidationError("analyze",
                                   "exactly one of --responses or --synth is required");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim)) return cmd_simulate(sim_args);
    if (app.got_subcommand(render)) return cmd_render(render_args);
    return cmd_analyze(analyze_args);
  } catch (const legibot::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const legibot::RuntimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
