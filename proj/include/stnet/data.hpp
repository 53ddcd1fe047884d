#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stnet/net.hpp"
#include "stnet/ppm.hpp"
#include "stnet/render.hpp"
#include "stnet/sim.hpp"
#include "stnet/tensor.hpp"

namespace stnet::data {

/// Everything needed to regenerate a dataset; serialised verbatim as manifest.json.
struct GenerationConfig {
  std::string profile = "desk";
  std::uint64_t seed = 0;
  std::size_t cycles = 5;
  std::size_t steps_per_cycle = 176;
  std::size_t window = 10;
  std::size_t image_height = 64;
  std::size_t image_width = 64;
  double split_ratio = 0.8;
  double load_magnitude = 1.0;
  std::vector<sim::LoadCondition> loads{sim::kAllLoads.begin(), sim::kAllLoads.end()};
  sim::RobotSpec robot;
  render::Camera camera;
  render::RenderOptions render;

  void validate() const;
  std::size_t samples_per_trial() const { return cycles * steps_per_cycle; }
};

/// Defaults matching a network profile (image size, window, marker count).
GenerationConfig default_generation(const std::string& profile, std::uint64_t seed);

nlohmann::json to_json(const GenerationConfig& cfg);
GenerationConfig generation_from_json(const nlohmann::json& j);

/// One row of records.csv.
struct Record {
  std::size_t index = 0;
  Tensor window;       // T×4, oldest step first
  PointCloud truth;    // n×3 marker positions
  sim::LoadCondition load = sim::LoadCondition::None;
};

std::string records_header(std::size_t window, std::size_t markers);
void write_records(const std::filesystem::path& path, const std::vector<Record>& records,
                   std::size_t window, std::size_t markers);
/// Throws ParseError naming the row and line on arity or number errors.
std::vector<Record> read_records(const std::filesystem::path& path, std::size_t window,
                                 std::size_t markers);

std::string trial_dir_name(sim::LoadCondition load);
std::string image_file_name(std::size_t index);

/// Left-padded T×4 windows over a step sequence: window k holds steps max(0, k−T+1)..k,
/// with the first step repeated where the history is short.
std::vector<Tensor> tendon_windows(const std::vector<sim::TrajectoryStep>& steps, std::size_t window);

/// Generates every trial into `out` (created if needed). Trials render in parallel;
/// a failing frame aborts the run with its trial and index.
void generate(const GenerationConfig& cfg, const std::filesystem::path& out);
/// Regenerates from an existing manifest.json.
void generate_from_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out);

struct Trial {
  sim::LoadCondition load = sim::LoadCondition::None;
  std::vector<Record> records;
  std::vector<Image8> images;
};

struct SampleRef {
  std::size_t trial = 0;
  std::size_t index = 0;
  auto operator<=>(const SampleRef&) const = default;
};

/// Read-only view of a generated dataset; images are kept as 8-bit rasters.
class Dataset {
 public:
  static Dataset open(const std::filesystem::path& dir);

  const GenerationConfig& config() const noexcept { return config_; }
  const std::vector<Trial>& trials() const noexcept { return trials_; }
  std::size_t size() const;
  /// Every sample, trial-major.
  std::vector<SampleRef> all() const;
  std::optional<std::size_t> trial_index(sim::LoadCondition load) const;

  const Record& record(SampleRef s) const;
  Tensor image(SampleRef s) const;

 private:
  GenerationConfig config_;
  std::vector<Trial> trials_;
};

struct Split {
  std::vector<SampleRef> train;
  std::vector<SampleRef> test;
};

/// Seeded shuffle of `items`; the first ⌈N·ratio⌉ go to train, the rest to test.
/// Throws ContractError for an empty list or ratio outside (0, 1).
Split split(const std::vector<SampleRef>& items, double ratio, std::uint64_t seed);
/// The same, applied to each trial independently so every load condition keeps the ratio.
/// `only`, when set, restricts to one trial.
Split split_dataset(const Dataset& ds, double ratio, std::uint64_t seed,
                    std::optional<sim::LoadCondition> only = std::nullopt);

struct AuditReport {
  std::size_t checked = 0;
  std::size_t passed = 0;
  double max_deviation = 0.0;
  std::vector<std::string> failures;
};

/// Recomputes every sample's markers from its stored current q and load label.
AuditReport audit(const Dataset& ds, double tolerance = 1e-9);

/// FNV-1a over the sorted relative paths and byte contents of every file under `dir`.
std::uint64_t hash_directory(const std::filesystem::path& dir);

}  // namespace stnet::data
