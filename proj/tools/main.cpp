// Command line front end: scenario batches, mixture fitting, observation-log
// replay and report aggregation.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "quadcatch/config.hpp"
#include "quadcatch/experiments.hpp"

namespace {

using namespace quadcatch;

FullConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    return default_config();
  }
  return load_config(path);
}

std::optional<Scenario> find_scenario(const FullConfig& cfg, const std::string& name) {
  for (const auto& s : cfg.scenarios) {
    if (s.name == name) {
      return s;
    }
  }
  return std::nullopt;
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    throw InvalidInputError("cannot open output file: " + out_path);
  }
  out << text;
}

void write_trace_csv(const EpisodeResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidInputError("cannot open trace file: " + path.string());
  }
  out << "t,lq0,lq1,lq2,lqd0,lqd1,lqd2,ltau0,ltau1,ltau2,"
         "rq0,rq1,rq2,rqd0,rqd1,rqd2,rtau0,rtau1,rtau2,"
         "obj_x,obj_y,obj_z,closed,plan_x,plan_y,plan_z,plan_t\n";
  out.precision(10);
  for (const auto& s : result.trace) {
    out << s.t;
    for (int i = 0; i < 3; ++i) out << ',' << s.left.q(i);
    for (int i = 0; i < 3; ++i) out << ',' << s.left.qd(i);
    for (int i = 0; i < 3; ++i) out << ',' << s.tau_left(i);
    for (int i = 0; i < 3; ++i) out << ',' << s.right.q(i);
    for (int i = 0; i < 3; ++i) out << ',' << s.right.qd(i);
    for (int i = 0; i < 3; ++i) out << ',' << s.tau_right(i);
    out << ',' << s.object.x() << ',' << s.object.y() << ',' << s.object.z();
    out << ',' << (s.triggered ? 1 : 0);
    if (s.plan) {
      out << ',' << s.plan->x_catch.x() << ',' << s.plan->x_catch.y() << ','
          << s.plan->x_catch.z() << ',' << s.plan->t_catch;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

int cmd_run(const std::string& config_path, const std::string& scenario_name,
            const std::string& method, std::uint64_t seed, bool seed_set,
            const std::string& out_path, const std::string& format_name, int jobs,
            const std::string& trace_dir) {
  FullConfig cfg = load_or_default(config_path);
  auto scenario = find_scenario(cfg, scenario_name);
  if (!scenario) {
    std::cerr << "unknown scenario '" << scenario_name << "'; available:";
    for (const auto& s : cfg.scenarios) {
      std::cerr << ' ' << s.name;
    }
    std::cerr << '\n';
    return 1;
  }
  if (seed_set) {
    scenario->seed = seed;
  }
  if (method != "all") {
    scenario->methods = {catch_method_from_string(method)};
  }

  const SimConfig sim = cfg.make_sim_config();
  const Report report = run_scenario(*scenario, sim, jobs);
  write_or_print(format_report(report, report_format_from_string(format_name)),
                 out_path);

  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    SimConfig traced = sim;
    traced.record_trace = true;
    traced.noise = scenario->noise;
    const auto draws = sample_throws(*scenario, nominal_foot_center(sim.legs));
    for (CatchMethod m : scenario->methods) {
      traced.method = m;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        EpisodeResult result;
        try {
          result = run_episode(draws[i].spec, traced, draws[i].episode_seed);
        } catch (const DivergedEpisodeError&) {
          continue;
        }
        std::ostringstream name;
        name << scenario->name << '_' << to_string(m) << '_' << i << ".csv";
        write_trace_csv(result, std::filesystem::path(trace_dir) / name.str());
      }
    }
  }
  return 0;
}

int cmd_fit_gmm(const std::string& config_path, const std::string& demos_path,
                const std::string& out_path, std::uint64_t seed, bool seed_set) {
  FullConfig cfg = load_or_default(config_path);
  if (seed_set) {
    cfg.gmm.em.seed = seed;
  }

  DemoDataset demos;
  if (!demos_path.empty()) {
    demos = load_demo_dataset(demos_path);
  } else {
    const Vec3 mean = nominal_foot_center(cfg.legs) + cfg.gmm.demo_mean_offset;
    demos = generate_demo_dataset(cfg.gmm.demo_count, mean, cfg.gmm.demo_std,
                                  cfg.gmm.em.seed);
  }

  std::cout << "demonstrations: " << demos.points.size() << " (" << demos.source
            << ")\n";
  for (int k = cfg.gmm.k_min; k <= cfg.gmm.k_max; ++k) {
    const EmResult fit = fit_em(demos, k, cfg.gmm.em);
    std::cout << "k=" << k << "  iterations=" << fit.iterations
              << "  log-likelihood=" << fit.log_likelihood.back()
              << "  bic=" << bic(fit.mixture, demos) << '\n';
  }
  const GaussianMixture best = select_k(demos, cfg.gmm.k_min, cfg.gmm.k_max, cfg.gmm.em);
  std::cout << "selected k=" << best.k() << '\n';
  if (!out_path.empty()) {
    save_mixture(best, out_path);
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& in_path,
               const std::string& method, const std::string& out_path,
               const std::string& format_name) {
  FullConfig cfg = load_or_default(config_path);
  if (method != "all") {
    cfg.method = catch_method_from_string(method);
  }
  const ObservationStream raw = load_observation_log(in_path);
  const ObservationStream stream =
      throw_start_filter(raw, cfg.camera, cfg.delta_min);

  SelectorContext ctx;
  ctx.x_offset = cfg.x_offset;
  ctx.t_horizon = cfg.t_horizon;
  ctx.x_c = nominal_foot_center(cfg.legs);
  ctx.mixture = cfg.build_mixture();

  const bool csv = report_format_from_string(format_name) == ReportFormat::csv;
  std::ostringstream out;
  out.precision(10);
  if (csv) {
    out << "stamp,n,status,t_catch,t_remain,x,y,z\n";
  } else {
    out << "replaying " << stream.frames.size() << " post-release detections ("
        << raw.frames.size() << " total)\n";
  }

  RegressionAccumulators acc;
  for (const auto& det : stream.frames) {
    acc.ingest(pixel_to_robot(det, cfg.camera));
    if (acc.count() < 3) {
      continue;
    }
    const double t_now = det.stamp - acc.time_origin();
    std::string status = "ok";
    CatchPlan plan;
    try {
      const TrajectoryFit fit = fit_trajectory(acc, cfg.lambda, cfg.g);
      plan = refresh(cfg.method, fit, ctx, t_now);
    } catch (const Error& e) {
      status = e.what();
    }
    if (csv) {
      out << det.stamp << ',' << acc.count() << ',' << (status == "ok" ? "ok" : "infeasible");
      if (status == "ok") {
        out << ',' << plan.t_catch << ',' << plan.t_remain << ',' << plan.x_catch.x()
            << ',' << plan.x_catch.y() << ',' << plan.x_catch.z();
      } else {
        out << ",,,,,";
      }
      out << '\n';
    } else {
      out << "t=" << det.stamp << " n=" << acc.count();
      if (status == "ok") {
        out << "  catch at (" << plan.x_catch.x() << ", " << plan.x_catch.y() << ", "
            << plan.x_catch.z() << ")  t_catch=" << plan.t_catch
            << "  t_remain=" << plan.t_remain;
      } else {
        out << "  " << status;
      }
      out << '\n';
    }
  }
  write_or_print(out.str(), out_path);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path,
               const std::string& format_name) {
  std::vector<Report> reports;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) {
      throw InvalidInputError("cannot open report: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    reports.push_back(parse_report_json(buffer.str()));
  }
  const Report merged = aggregate_reports(reports);
  write_or_print(format_report(merged, report_format_from_string(format_name)),
                 out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped object-catching pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scenario_name = "centered-50";
  std::string method = "all";
  std::string out_path;
  std::string format_name = "table";
  std::string in_path;
  std::string trace_dir;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto* run = app.add_subcommand("run", "run a scenario batch");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--scenario", scenario_name, "scenario name");
  run->add_option("--method", method, "plane|mindist|gmm|all")
      ->check(CLI::IsMember({"plane", "mindist", "gmm", "all"}));
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_path, "output file (stdout when omitted)");
  run->add_option("--format", format_name, "csv|json|table")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  run->add_option("--jobs", jobs, "worker threads (0 = hardware)");
  run->add_option("--trace-out", trace_dir, "also write per-episode trace CSVs here");

  auto* fit = app.add_subcommand("fit-gmm", "fit the demonstration mixture");
  fit->add_option("--config", config_path, "JSON config file");
  fit->add_option("--in", in_path, "demo dataset (x y z per line); synthetic when omitted");
  fit->add_option("--out", out_path, "mixture JSON output path");
  auto* fit_seed_opt = fit->add_option("--seed", seed, "override the fitting seed");

  auto* replay = app.add_subcommand("replay", "turn an observation log into plans");
  replay->add_option("--config", config_path, "JSON config file");
  replay->add_option("--in", in_path, "observation log (stamp xp yp depth)")->required();
  replay->add_option("--method", method, "plane|mindist|gmm")
      ->check(CLI::IsMember({"plane", "mindist", "gmm", "all"}));
  replay->add_option("--out", out_path, "output file (stdout when omitted)");
  replay->add_option("--format", format_name, "csv|table")
      ->check(CLI::IsMember({"csv", "table"}));

  auto* report = app.add_subcommand("report", "aggregate JSON reports");
  report->add_option("--in", inputs, "report JSON files")->required()->expected(-1);
  report->add_option("--out", out_path, "output file (stdout when omitted)");
  report->add_option("--format", format_name, "csv|json|table")
      ->check(CLI::IsMember({"csv", "json", "table"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, scenario_name, method, seed, !seed_opt->empty(),
                     out_path, format_name, jobs, trace_dir);
    }
    if (fit->parsed()) {
      return cmd_fit_gmm(config_path, in_path, out_path, seed, !fit_seed_opt->empty());
    }
    if (replay->parsed()) {
      return cmd_replay(config_path, in_path, method, out_path, format_name);
    }
    if (report->parsed()) {
      return cmd_report(inputs, out_path, format_name);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
