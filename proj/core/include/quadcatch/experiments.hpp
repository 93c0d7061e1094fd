#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quadcatch/simulator.hpp"

namespace quadcatch {

// Distribution over throws: origin in front of the robot, an aim point near
// the nominal foot center, and a horizontal speed range. Given origin, aim
// and speed, the release velocity is chosen so the parabola passes through
// the aim point.
struct ThrowSampler {
  double distance = 2.0;       // mean origin distance in front of the robot, m
  double origin_height = 0.0;  // mean origin height, m
  Vec3 origin_std{0.05, 0.15, 0.05};
  Vec3 aim_offset = Vec3::Zero();  // added to the nominal foot center
  Vec3 aim_std{0.05, 0.05, 0.06};
  // When set, the aim height is drawn uniformly from this range instead.
  std::optional<std::array<double, 2>> aim_z_range;
  double speed_min = 2.5;  // horizontal speed, m/s
  double speed_max = 4.5;
};

struct Scenario {
  std::string name = "scenario";
  ThrowSampler sampler;
  int n_throws = 50;
  std::vector<CatchMethod> methods{CatchMethod::plane, CatchMethod::min_dist,
                                   CatchMethod::gmm};
  NoiseModel noise;
  std::uint64_t seed = 1;
};

struct ThrowDraw {
  ThrowSpec spec;
  std::uint64_t episode_seed = 0;
};

// Deterministic throw sequence for a scenario; every method sees the same
// draws and the same per-episode seeds.
std::vector<ThrowDraw> sample_throws(const Scenario& scenario, const Vec3& aim_center);

struct EpisodeRow {
  int index = 0;
  CatchMethod method = CatchMethod::plane;
  std::uint64_t episode_seed = 0;
  ThrowSpec throw_spec;
  bool caught = false;
  double catch_error = 0.0;
  double mean_power = 0.0;
  bool diverged = false;
  std::optional<CatchPlan> trigger_plan;
};

struct MethodSummary {
  CatchMethod method = CatchMethod::plane;
  int n_throws = 0;
  int caught = 0;
  double success_pct = 0.0;
  double mean_power_caught = 0.0;  // mean over successful episodes, W
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  int n_throws = 0;
  double capture_radius = 0.0;
  std::vector<MethodSummary> summary;
  std::vector<EpisodeRow> episodes;
};

bool operator==(const EpisodeRow& a, const EpisodeRow& b);
bool operator==(const MethodSummary& a, const MethodSummary& b);
bool operator==(const Report& a, const Report& b);

// Runs n_throws seeded episodes for every method of the scenario against
// identical throw sequences. Episodes may run in parallel (n_workers == 0
// picks the hardware concurrency); assembly is deterministic. Diverged
// episodes count as failures and are flagged in their rows.
Report run_scenario(const Scenario& scenario, const SimConfig& base,
                    int n_workers = 0);

// Concatenates the episodes of several reports and recomputes the per-method
// summaries.
Report aggregate_reports(const std::vector<Report>& reports);

enum class ReportFormat { table, csv, json };
ReportFormat report_format_from_string(const std::string& name);

// "80.0" for 40 of 50.
std::string format_percentage(int caught, int total);

std::string format_report(const Report& report, ReportFormat format);
void emit_report(const Report& report, const std::filesystem::path& path,
                 ReportFormat format);
Report parse_report_json(const std::string& text);

// Built-in scenario catalog.
Scenario make_centered_scenario(int n_throws = 50, std::uint64_t seed = 1);
Scenario make_low_scenario(int n_throws = 10, std::uint64_t seed = 1);
Scenario make_smoke_scenario(std::uint64_t seed = 1);

}  // namespace quadcatch
