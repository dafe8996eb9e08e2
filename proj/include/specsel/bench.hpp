#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsel/common.hpp"
#include "specsel/datacube.hpp"

namespace specsel {

struct LatencyReport {
  std::string method;
  std::size_t samples = 0;  // timed pipeline calls
  std::size_t warmup = 0;   // untimed passes over the cube list
  double mean_sec = 0.0;
  double std_sec = 0.0;
  double min_sec = 0.0;
  double max_sec = 0.0;
  double median_sec = 0.0;
  std::string environment;
};

// Smallest observable steady_clock increment, probed once per process.
inline std::uint64_t timer_resolution_ns() {
  static const std::uint64_t probed = [] {
    using clock = std::chrono::steady_clock;
    std::uint64_t best = ~std::uint64_t{0};
    for (int i = 0; i < 64; ++i) {
      auto t0 = clock::now();
      auto t1 = clock::now();
      while (t1 == t0) t1 = clock::now();
      auto delta = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
      best = std::min(best, static_cast<std::uint64_t>(delta));
    }
    return best == ~std::uint64_t{0} ? std::uint64_t{1} : best;
  }();
  return probed;
}

inline std::string environment_note() {
  const char* threads = std::getenv("SPECSEL_THREADS");
#ifdef NDEBUG
  const char* profile = "release";
#else
  const char* profile = "debug";
#endif
  std::ostringstream out;
  out << "threads=" << (threads != nullptr && *threads != '\0' ? threads : "1")
      << " profile=" << profile << " timer_res_ns=" << timer_resolution_ns();
  return out.str();
}

using PipelineFn = std::function<double(const SpectralCube&)>;

// Runs `warmup` untimed passes over the cubes, then `reps` timed passes,
// clocking each pipeline call separately on the monotonic clock. When
// last_scores is given it receives the scores of the final timed pass.
inline LatencyReport time_pipeline(const std::string& method, const PipelineFn& pipeline,
                                   const std::vector<const SpectralCube*>& cubes,
                                   std::size_t warmup = 5, std::size_t reps = 20,
                                   std::vector<double>* last_scores = nullptr) {
  if (cubes.empty()) throw Error(ErrorKind::dataset, "no cubes to benchmark");
  if (reps == 0) throw Error(ErrorKind::config, "benchmark needs at least one repetition");
  for (const SpectralCube* cube : cubes)
    if (cube == nullptr) throw Error(ErrorKind::dataset, "null cube in benchmark list");

  using clock = std::chrono::steady_clock;
  for (std::size_t w = 0; w < warmup; ++w)
    for (const SpectralCube* cube : cubes) pipeline(*cube);

  std::vector<double> samples;
  samples.reserve(reps * cubes.size());
  std::vector<double> scores(cubes.size());
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      auto t0 = clock::now();
      double score = pipeline(*cubes[i]);
      auto t1 = clock::now();
      scores[i] = score;
      samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
  }
  if (last_scores != nullptr) *last_scores = scores;

  LatencyReport report;
  report.method = method;
  report.samples = samples.size();
  report.warmup = warmup;
  report.environment = environment_note();

  double sum = 0.0;
  report.min_sec = samples[0];
  report.max_sec = samples[0];
  for (double s : samples) {
    sum += s;
    report.min_sec = std::min(report.min_sec, s);
    report.max_sec = std::max(report.max_sec, s);
  }
  report.mean_sec = sum / static_cast<double>(samples.size());

  double sq = 0.0;
  for (double s : samples) sq += (s - report.mean_sec) * (s - report.mean_sec);
  report.std_sec =
      samples.size() > 1 ? std::sqrt(sq / static_cast<double>(samples.size() - 1)) : 0.0;

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  std::size_t mid = sorted.size() / 2;
  report.median_sec = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return report;
}

inline double speedup(const LatencyReport& baseline, const LatencyReport& candidate) {
  if (baseline.samples == 0 || candidate.samples == 0)
    throw Error(ErrorKind::config, "speedup needs two measured reports");
  if (!(candidate.mean_sec > 0.0))
    throw Error(ErrorKind::numeric, "candidate mean latency is not positive");
  return baseline.mean_sec / candidate.mean_sec;
}

inline void save_latency_csv(const std::filesystem::path& path,
                             const std::vector<LatencyReport>& reports) {
  std::ostringstream out;
  out << "method,sec_per_sample,std,min,max\n";
  out << std::fixed << std::setprecision(9);
  for (const LatencyReport& r : reports)
    out << r.method << ',' << r.mean_sec << ',' << r.std_sec << ',' << r.min_sec << ','
        << r.max_sec << '\n';
  write_file(path, out.str());
}

inline void save_latency_json(const std::filesystem::path& path,
                              const std::vector<LatencyReport>& reports) {
  nlohmann::json root;
  root["version"] = 1;
  nlohmann::json rows = nlohmann::json::array();
  for (const LatencyReport& r : reports) {
    rows.push_back({{"method", r.method},
                    {"samples", r.samples},
                    {"warmup", r.warmup},
                    {"sec_per_sample", r.mean_sec},
                    {"std", r.std_sec},
                    {"min", r.min_sec},
                    {"max", r.max_sec},
                    {"median", r.median_sec},
                    {"environment", r.environment}});
  }
  root["reports"] = rows;
  write_file(path, root.dump(2) + "\n");
}

}  // namespace specsel
