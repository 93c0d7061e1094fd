#include "quadcatch/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace quadcatch {

namespace {

using ordered_json = nlohmann::ordered_json;

bool vec3_eq(const Vec3& a, const Vec3& b) {
  return a.x() == b.x() && a.y() == b.y() && a.z() == b.z();
}

bool plan_eq(const std::optional<CatchPlan>& a, const std::optional<CatchPlan>& b) {
  if (a.has_value() != b.has_value()) {
    return false;
  }
  if (!a) {
    return true;
  }
  return vec3_eq(a->x_catch, b->x_catch) && a->t_catch == b->t_catch &&
         a->t_remain == b->t_remain && a->method == b->method;
}

ordered_json to_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidInputError("expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::vector<ThrowDraw> sample_throws(const Scenario& scenario, const Vec3& aim_center) {
  if (scenario.n_throws < 1) {
    throw InvalidInputError("scenario needs at least one throw");
  }
  const ThrowSampler& s = scenario.sampler;
  if (!(s.speed_min > 0.0) || s.speed_max < s.speed_min) {
    throw InvalidInputError("invalid throw speed range");
  }

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<ThrowDraw> draws;
  draws.reserve(scenario.n_throws);
  for (int i = 0; i < scenario.n_throws; ++i) {
    Vec3 origin(s.distance, 0.0, s.origin_height);
    for (int a = 0; a < 3; ++a) {
      origin(a) += s.origin_std(a) * gauss(rng);
    }

    Vec3 aim = aim_center + s.aim_offset;
    for (int a = 0; a < 3; ++a) {
      aim(a) += s.aim_std(a) * gauss(rng);
    }
    if (s.aim_z_range) {
      const auto [lo, hi] = *s.aim_z_range;
      aim.z() = lo + (hi - lo) * uniform(rng);
    }

    const double speed = s.speed_min + (s.speed_max - s.speed_min) * uniform(rng);
    const Vec3 delta = aim - origin;
    const double horizontal = std::max(delta.head<2>().norm(), 1e-6);
    const double flight_time = horizontal / speed;

    ThrowDraw draw;
    draw.spec.p0 = origin;
    draw.spec.v0.x() = delta.x() / flight_time;
    draw.spec.v0.y() = delta.y() / flight_time;
    draw.spec.v0.z() =
        (delta.z() + 0.5 * draw.spec.g * flight_time * flight_time) / flight_time;
    draw.spec.t0 = 0.0;
    draw.episode_seed = derive_seed(scenario.seed, static_cast<std::uint64_t>(i));
    draws.push_back(draw);
  }
  return draws;
}

bool operator==(const EpisodeRow& a, const EpisodeRow& b) {
  return a.index == b.index && a.method == b.method &&
         a.episode_seed == b.episode_seed && vec3_eq(a.throw_spec.p0, b.throw_spec.p0) &&
         vec3_eq(a.throw_spec.v0, b.throw_spec.v0) && a.throw_spec.g == b.throw_spec.g &&
         a.throw_spec.t0 == b.throw_spec.t0 && a.caught == b.caught &&
         a.catch_error == b.catch_error && a.mean_power == b.mean_power &&
         a.diverged == b.diverged && plan_eq(a.trigger_plan, b.trigger_plan);
}

bool operator==(const MethodSummary& a, const MethodSummary& b) {
  return a.method == b.method && a.n_throws == b.n_throws && a.caught == b.caught &&
         a.success_pct == b.success_pct && a.mean_power_caught == b.mean_power_caught;
}

bool operator==(const Report& a, const Report& b) {
  return a.scenario == b.scenario && a.seed == b.seed && a.n_throws == b.n_throws &&
         a.capture_radius == b.capture_radius && a.summary == b.summary &&
         a.episodes == b.episodes;
}

namespace {

std::vector<MethodSummary> summarize(const std::vector<EpisodeRow>& rows,
                                     const std::vector<CatchMethod>& methods) {
  std::vector<MethodSummary> out;
  for (CatchMethod method : methods) {
    MethodSummary s;
    s.method = method;
    double power = 0.0;
    for (const auto& row : rows) {
      if (row.method != method) {
        continue;
      }
      ++s.n_throws;
      if (row.caught) {
        ++s.caught;
        power += row.mean_power;
      }
    }
    s.success_pct = s.n_throws > 0 ? 100.0 * s.caught / s.n_throws : 0.0;
    s.mean_power_caught = s.caught > 0 ? power / s.caught : 0.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace

Report run_scenario(const Scenario& scenario, const SimConfig& base, int n_workers) {
  if (scenario.methods.empty()) {
    throw InvalidInputError("scenario needs at least one method");
  }
  const Vec3 aim_center = nominal_foot_center(base.legs);
  const std::vector<ThrowDraw> draws = sample_throws(scenario, aim_center);

  const int n_methods = static_cast<int>(scenario.methods.size());
  const int n_tasks = n_methods * scenario.n_throws;
  std::vector<EpisodeRow> rows(n_tasks);

  if (n_workers <= 0) {
    n_workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  n_workers = std::clamp(n_workers, 1, n_tasks);

  std::atomic<int> next_task{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const int task = next_task.fetch_add(1);
      if (task >= n_tasks || failed.load()) {
        return;
      }
      const int m = task / scenario.n_throws;
      const int i = task % scenario.n_throws;

      SimConfig cfg = base;
      cfg.method = scenario.methods[m];
      cfg.noise = scenario.noise;
      cfg.record_trace = false;

      EpisodeRow row;
      row.index = i;
      row.method = cfg.method;
      row.episode_seed = draws[i].episode_seed;
      row.throw_spec = draws[i].spec;
      try {
        const EpisodeResult result = run_episode(draws[i].spec, cfg, row.episode_seed);
        row.caught = result.caught;
        row.catch_error = result.catch_error;
        row.mean_power = result.mean_power;
        if (result.trigger_plan) {
          row.trigger_plan = *result.trigger_plan;
        }
      } catch (const DivergedEpisodeError&) {
        row.caught = false;
        row.diverged = true;
        row.catch_error = std::numeric_limits<double>::max();
        row.mean_power = 0.0;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        failed.store(true);
        return;
      }
      rows[task] = std::move(row);
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  Report report;
  report.scenario = scenario.name;
  report.seed = scenario.seed;
  report.n_throws = scenario.n_throws;
  report.capture_radius = base.capture_radius;
  report.episodes = std::move(rows);
  report.summary = summarize(report.episodes, scenario.methods);
  return report;
}

Report aggregate_reports(const std::vector<Report>& reports) {
  if (reports.empty()) {
    throw InvalidInputError("nothing to aggregate");
  }
  Report out;
  out.scenario = "aggregate of " + std::to_string(reports.size()) + " reports";
  out.seed = reports.front().seed;
  out.capture_radius = reports.front().capture_radius;

  std::vector<CatchMethod> methods;
  for (const auto& r : reports) {
    out.n_throws += r.n_throws;
    for (const auto& row : r.episodes) {
      EpisodeRow copy = row;
      copy.index = static_cast<int>(out.episodes.size());
      out.episodes.push_back(std::move(copy));
      if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
        methods.push_back(row.method);
      }
    }
  }
  out.summary = summarize(out.episodes, methods);
  return out;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "table") {
    return ReportFormat::table;
  }
  if (name == "csv") {
    return ReportFormat::csv;
  }
  if (name == "json") {
    return ReportFormat::json;
  }
  throw InvalidInputError("unknown report format: " + name);
}

std::string format_percentage(int caught, int total) {
  const double pct = total > 0 ? 100.0 * caught / total : 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", pct);
  return buf;
}

namespace {

std::string format_table(const Report& report) {
  std::ostringstream out;
  out << "scenario: " << report.scenario << " (seed " << report.seed
      << ", capture radius " << report.capture_radius << " m)\n";
  out << "method    throws  caught  success[%]  mean power (caught) [W]\n";
  for (const auto& s : report.summary) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-8s  %6d  %6d  %10s  %23.2f\n",
                  to_string(s.method).c_str(), s.n_throws, s.caught,
                  format_percentage(s.caught, s.n_throws).c_str(),
                  s.mean_power_caught);
    out << line;
  }
  return out.str();
}

std::string format_csv(const Report& report) {
  std::ostringstream out;
  out.precision(17);
  out << "index,method,episode_seed,caught,catch_error,mean_power,diverged,"
         "plan_x,plan_y,plan_z,plan_t_catch,"
         "p0_x,p0_y,p0_z,v0_x,v0_y,v0_z\n";
  for (const auto& row : report.episodes) {
    out << row.index << ',' << to_string(row.method) << ',' << row.episode_seed
        << ',' << (row.caught ? 1 : 0) << ',' << row.catch_error << ','
        << row.mean_power << ',' << (row.diverged ? 1 : 0) << ',';
    if (row.trigger_plan) {
      out << row.trigger_plan->x_catch.x() << ',' << row.trigger_plan->x_catch.y()
          << ',' << row.trigger_plan->x_catch.z() << ',' << row.trigger_plan->t_catch;
    } else {
      out << ",,,";
    }
    out << ',' << row.throw_spec.p0.x() << ',' << row.throw_spec.p0.y() << ','
        << row.throw_spec.p0.z() << ',' << row.throw_spec.v0.x() << ','
        << row.throw_spec.v0.y() << ',' << row.throw_spec.v0.z() << '\n';
  }
  return out.str();
}

ordered_json report_to_json(const Report& report) {
  ordered_json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["n_throws"] = report.n_throws;
  j["capture_radius"] = report.capture_radius;
  j["summary"] = ordered_json::array();
  for (const auto& s : report.summary) {
    ordered_json js;
    js["method"] = to_string(s.method);
    js["n_throws"] = s.n_throws;
    js["caught"] = s.caught;
    js["success_pct"] = s.success_pct;
    js["success_pct_text"] = format_percentage(s.caught, s.n_throws);
    js["mean_power_caught"] = s.mean_power_caught;
    j["summary"].push_back(std::move(js));
  }
  j["episodes"] = ordered_json::array();
  for (const auto& row : report.episodes) {
    ordered_json jr;
    jr["index"] = row.index;
    jr["method"] = to_string(row.method);
    jr["episode_seed"] = row.episode_seed;
    jr["caught"] = row.caught;
    jr["catch_error"] = row.catch_error;
    jr["mean_power"] = row.mean_power;
    jr["diverged"] = row.diverged;
    jr["throw"] = {{"p0", to_json(row.throw_spec.p0)},
                   {"v0", to_json(row.throw_spec.v0)},
                   {"g", row.throw_spec.g},
                   {"t0", row.throw_spec.t0}};
    if (row.trigger_plan) {
      jr["trigger_plan"] = {{"x_catch", to_json(row.trigger_plan->x_catch)},
                            {"t_catch", row.trigger_plan->t_catch},
                            {"t_remain", row.trigger_plan->t_remain},
                            {"method", to_string(row.trigger_plan->method)}};
    } else {
      jr["trigger_plan"] = nullptr;
    }
    j["episodes"].push_back(std::move(jr));
  }
  return j;
}

}  // namespace

std::string format_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::table:
      return format_table(report);
    case ReportFormat::csv:
      return format_csv(report);
    case ReportFormat::json:
      return report_to_json(report).dump(2) + "\n";
  }
  throw InvalidInputError("unknown report format");
}

void emit_report(const Report& report, const std::filesystem::path& path,
                 ReportFormat format) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidInputError("cannot open report for writing: " + path.string());
  }
  out << format_report(report, format);
  if (!out) {
    throw InvalidInputError("failed to write report: " + path.string());
  }
}

Report parse_report_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInputError(std::string("report parse error: ") + e.what());
  }

  Report report;
  report.scenario = j.at("scenario").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.n_throws = j.at("n_throws").get<int>();
  report.capture_radius = j.at("capture_radius").get<double>();
  for (const auto& js : j.at("summary")) {
    MethodSummary s;
    s.method = catch_method_from_string(js.at("method").get<std::string>());
    s.n_throws = js.at("n_throws").get<int>();
    s.caught = js.at("caught").get<int>();
    s.success_pct = js.at("success_pct").get<double>();
    s.mean_power_caught = js.at("mean_power_caught").get<double>();
    report.summary.push_back(s);
  }
  for (const auto& jr : j.at("episodes")) {
    EpisodeRow row;
    row.index = jr.at("index").get<int>();
    row.method = catch_method_from_string(jr.at("method").get<std::string>());
    row.episode_seed = jr.at("episode_seed").get<std::uint64_t>();
    row.caught = jr.at("caught").get<bool>();
    row.catch_error = jr.at("catch_error").get<double>();
    row.mean_power = jr.at("mean_power").get<double>();
    row.diverged = jr.at("diverged").get<bool>();
    const auto& jt = jr.at("throw");
    row.throw_spec.p0 = vec3_from_json(jt.at("p0"));
    row.throw_spec.v0 = vec3_from_json(jt.at("v0"));
    row.throw_spec.g = jt.at("g").get<double>();
    row.throw_spec.t0 = jt.at("t0").get<double>();
    if (!jr.at("trigger_plan").is_null()) {
      const auto& jp = jr.at("trigger_plan");
      CatchPlan plan;
      plan.x_catch = vec3_from_json(jp.at("x_catch"));
      plan.t_catch = jp.at("t_catch").get<double>();
      plan.t_remain = jp.at("t_remain").get<double>();
      plan.method = catch_method_from_string(jp.at("method").get<std::string>());
      row.trigger_plan = plan;
    }
    report.episodes.push_back(std::move(row));
  }
  return report;
}

Scenario make_centered_scenario(int n_throws, std::uint64_t seed) {
  Scenario s;
  s.name = "centered-" + std::to_string(n_throws);
  s.n_throws = n_throws;
  s.seed = seed;
  return s;
}

Scenario make_low_scenario(int n_throws, std::uint64_t seed) {
  Scenario s;
  s.name = "low-" + std::to_string(n_throws);
  s.n_throws = n_throws;
  s.seed = seed;
  s.sampler.aim_std = Vec3(0.04, 0.04, 0.0);
  // Aim well below the shoulders, straddling the lower workspace limit.
  s.sampler.aim_z_range = {{-0.60, -0.44}};
  return s;
}

Scenario make_smoke_scenario(std::uint64_t seed) {
  Scenario s;
  s.name = "smoke-1";
  s.n_throws = 1;
  s.seed = seed;
  s.sampler.origin_std = Vec3::Zero();
  s.sampler.aim_std = Vec3::Zero();
  s.sampler.speed_min = 3.0;
  s.sampler.speed_max = 3.0;
  s.noise.sigma_px = 0.0;
  s.noise.sigma_depth = 0.0;
  s.noise.drop_prob = 0.0;
  return s;
}

}  // namespace quadcatch
