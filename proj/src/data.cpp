#include "stnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"
#include "stnet/rng.hpp"

namespace stnet::data {

namespace fs = std::filesystem;

void GenerationConfig::validate() const {
  if (cycles < 1 || steps_per_cycle < 1) throw ConfigError("generation: cycles and steps must be >= 1");
  if (window < 1) throw ConfigError("generation: window must be >= 1");
  if (image_height < 2 || image_width < 2) throw ConfigError("generation: image too small");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("generation: split ratio must be in (0, 1)");
  if (loads.empty()) throw ConfigError("generation: no load conditions");
  if (camera.height != image_height || camera.width != image_width) {
    throw ConfigError("generation: camera size differs from image size");
  }
  robot.validate();
  render.validate();
}

GenerationConfig default_generation(const std::string& profile, std::uint64_t seed) {
  const net::NetConfig net_cfg = net::profile_by_name(profile);
  GenerationConfig cfg;
  cfg.profile = profile;
  cfg.seed = seed;
  cfg.window = net_cfg.window;
  cfg.image_height = net_cfg.image_height;
  cfg.image_width = net_cfg.image_width;
  cfg.robot = sim::uniform_markers(net_cfg.points);
  if (profile == "tiny") {
    cfg.cycles = 1;
    cfg.steps_per_cycle = 24;
  }
  cfg.camera = render::default_camera(cfg.robot, cfg.image_height, cfg.image_width);
  cfg.render = render::default_options(cfg.image_height, cfg.image_width);
  cfg.render.seed = mix_seed(seed, 0x52454E44);
  return cfg;
}

nlohmann::json to_json(const GenerationConfig& cfg) {
  std::vector<std::string> loads;
  for (auto l : cfg.loads) loads.push_back(sim::to_string(l));
  return {{"format", "stnet-dataset"},
          {"version", 1},
          {"profile", cfg.profile},
          {"seed", cfg.seed},
          {"cycles", cfg.cycles},
          {"steps_per_cycle", cfg.steps_per_cycle},
          {"samples_per_trial", cfg.samples_per_trial()},
          {"window", cfg.window},
          {"image_height", cfg.image_height},
          {"image_width", cfg.image_width},
          {"split_ratio", cfg.split_ratio},
          {"load_magnitude", cfg.load_magnitude},
          {"loads", loads},
          {"robot", sim::to_json(cfg.robot)},
          {"camera", render::to_json(cfg.camera)},
          {"render", render::to_json(cfg.render)}};
}

GenerationConfig generation_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "stnet-dataset") {
      throw ParseError("manifest: not an stnet dataset manifest");
    }
    GenerationConfig cfg;
    cfg.profile = j.at("profile").get<std::string>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.cycles = j.at("cycles").get<std::size_t>();
    cfg.steps_per_cycle = j.at("steps_per_cycle").get<std::size_t>();
    cfg.window = j.at("window").get<std::size_t>();
    cfg.image_height = j.at("image_height").get<std::size_t>();
    cfg.image_width = j.at("image_width").get<std::size_t>();
    cfg.split_ratio = j.at("split_ratio").get<double>();
    cfg.load_magnitude = j.at("load_magnitude").get<double>();
    cfg.loads.clear();
    for (const auto& l : j.at("loads")) cfg.loads.push_back(sim::parse_load(l.get<std::string>()));
    cfg.robot = sim::robot_from_json(j.at("robot"));
    cfg.camera = render::camera_from_json(j.at("camera"));
    cfg.render = render::options_from_json(j.at("render"));
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

std::string records_header(std::size_t window, std::size_t markers) {
  std::string h = "index";
  for (std::size_t t = 0; t < window; ++t) {
    for (std::size_t a = 1; a <= 4; ++a) h += ",q" + std::to_string(a) + "_t" + std::to_string(t);
  }
  for (std::size_t i = 1; i <= markers; ++i) {
    for (const char* axis : {"x", "y", "z"}) h += std::string(",") + axis + std::to_string(i);
  }
  h += ",load";
  return h;
}

void write_records(const fs::path& path, const std::vector<Record>& records, std::size_t window,
                   std::size_t markers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << records_header(window, markers) << '\n';
  for (const Record& r : records) {
    if (r.window.size() != window * 4 || r.truth.size() != markers) {
      throw DimensionError("write_records: record " + std::to_string(r.index) + " has wrong arity");
    }
    std::string line = std::to_string(r.index);
    for (double v : r.window.values()) line += ',' + format_real(v);
    for (const Vec3& p : r.truth) {
      for (double v : p) line += ',' + format_real(v);
    }
    line += ',' + sim::to_string(r.load);
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Record> read_records(const fs::path& path, std::size_t window, std::size_t markers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  const std::size_t expected = 1 + 4 * window + 3 * markers + 1;
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("records: missing header", 1);
  ++line_no;
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    const std::size_t row = records.size();
    if (fields.size() != expected) {
      throw ParseError("records: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(expected),
                       line_no);
    }
    Record r;
    const double index = parse_real(fields[0], line_no);
    if (index < 0 || index != std::floor(index)) throw ParseError("records: bad index", line_no);
    r.index = static_cast<std::size_t>(index);
    std::vector<double> q(4 * window);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = parse_real(fields[1 + i], line_no);
    r.window = Tensor({window, 4}, std::move(q));
    r.truth.resize(markers);
    for (std::size_t i = 0; i < markers; ++i) {
      for (std::size_t a = 0; a < 3; ++a) {
        r.truth[i][a] = parse_real(fields[1 + 4 * window + 3 * i + a], line_no);
      }
    }
    try {
      r.load = sim::parse_load(fields.back());
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string trial_dir_name(sim::LoadCondition load) { return "trial_" + sim::to_string(load); }

std::string image_file_name(std::size_t index) { return "img_" + std::to_string(index) + ".ppm"; }

std::vector<Tensor> tendon_windows(const std::vector<sim::TrajectoryStep>& steps, std::size_t window) {
  if (window < 1) throw ContractError("tendon_windows: window must be >= 1");
  std::vector<Tensor> out;
  out.reserve(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    Tensor w({window, 4});
    for (std::size_t t = 0; t < window; ++t) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(k + t) - static_cast<std::ptrdiff_t>(window - 1);
      const auto& q = steps[static_cast<std::size_t>(std::max<std::ptrdiff_t>(src, 0))].q;
      for (std::size_t a = 0; a < 4; ++a) w[t * 4 + a] = q[a];
    }
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t label_tag(sim::LoadCondition load) { return fnv1a(kFnvOffset, sim::to_string(load)); }

void generate_trial(const GenerationConfig& cfg, std::size_t trial, const fs::path& out) {
  const sim::LoadCondition load = cfg.loads[trial];
  const sim::ExternalLoad force = sim::load_for(load, cfg.load_magnitude);
  const std::uint64_t trial_seed = mix_seed(cfg.seed, label_tag(load));
  const auto steps = sim::trajectory(cfg.cycles, cfg.steps_per_cycle, trial_seed, cfg.robot, force);
  const auto windows = tendon_windows(steps, cfg.window);
  const fs::path dir = out / trial_dir_name(load);
  fs::create_directories(dir);

  std::vector<Record> records(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    records[k].index = k;
    records[k].window = windows[k];
    records[k].truth = sim::marker_positions(steps[k].q, force, cfg.robot);
    records[k].load = load;
    const PointCloud backbone = sim::backbone_samples(steps[k].q, force, cfg.robot, 64);
    render::RenderOptions opts = cfg.render;
    opts.seed = mix_seed(mix_seed(cfg.render.seed, label_tag(load)), k);
    try {
      const Tensor img = render::render(records[k].truth, backbone, cfg.camera, opts);
      write_ppm(dir / image_file_name(k), quantize(img));
    } catch (const std::exception& e) {
      throw std::runtime_error("generate: trial " + sim::to_string(load) + " sample " +
                               std::to_string(k) + ": " + e.what());
    }
  }
  write_records(dir / "records.csv", records, cfg.window, cfg.robot.markers());
}

}  // namespace

void generate(const GenerationConfig& cfg, const fs::path& out) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw std::runtime_error("generate: cannot create " + out.string());
  {
    std::ofstream probe(out / "manifest.json", std::ios::binary);
    if (!probe) throw std::runtime_error("generate: directory not writable: " + out.string());
    probe << to_json(cfg).dump(2) << '\n';
  }

  const std::size_t trials = cfg.loads.size();
  std::vector<std::exception_ptr> errors(trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < trials; ++t) {
    try {
      generate_trial(cfg, t, out);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void generate_from_manifest(const fs::path& manifest, const fs::path& out) {
  std::ifstream in(manifest);
  if (!in) throw ParseError("cannot open " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  generate(generation_from_json(j), out);
}

Dataset Dataset::open(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw ParseError("no dataset manifest at " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  Dataset ds;
  ds.config_ = generation_from_json(j);
  const auto& cfg = ds.config_;
  for (auto load : cfg.loads) {
    const fs::path tdir = dir / trial_dir_name(load);
    Trial trial;
    trial.load = load;
    trial.records = read_records(tdir / "records.csv", cfg.window, cfg.robot.markers());
    if (trial.records.size() != cfg.samples_per_trial()) {
      throw ParseError(tdir.string() + ": " + std::to_string(trial.records.size()) + " records, expected " +
                       std::to_string(cfg.samples_per_trial()));
    }
    for (const Record& r : trial.records) {
      if (r.load != load) throw ParseError(tdir.string() + ": record " + std::to_string(r.index) + " has wrong load");
      Image8 img = read_ppm(tdir / image_file_name(r.index));
      if (img.height != cfg.image_height || img.width != cfg.image_width) {
        throw ParseError(tdir.string() + ": image " + std::to_string(r.index) + " has wrong size");
      }
      trial.images.push_back(std::move(img));
    }
    ds.trials_.push_back(std::move(trial));
  }
  return ds;
}

std::size_t Dataset::size() const {
  std::size_t n = 0;
  for (const auto& t : trials_) n += t.records.size();
  return n;
}

std::vector<SampleRef> Dataset::all() const {
  std::vector<SampleRef> out;
  for (std::size_t t = 0; t < trials_.size(); ++t) {
    for (std::size_t k = 0; k < trials_[t].records.size(); ++k) out.push_back({t, k});
  }
  return out;
}

std::optional<std::size_t> Dataset::trial_index(sim::LoadCondition load) const {
  for (std::size_t t = 0; t < trials_.size(); ++t) {
    if (trials_[t].load == load) return t;
  }
  return std::nullopt;
}

const Record& Dataset::record(SampleRef s) const { return trials_.at(s.trial).records.at(s.index); }

Tensor Dataset::image(SampleRef s) const { return dequantize(trials_.at(s.trial).images.at(s.index)); }

Split split(const std::vector<SampleRef>& items, double ratio, std::uint64_t seed) {
  if (items.empty()) throw ContractError("split: empty dataset");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("split: ratio must be in (0, 1)");
  std::vector<SampleRef> order = items;
  Rng rng(seed);
  rng.shuffle(order);
  // Guard against 880·0.8 = 704.0000000000001 rounding up.
  const double raw = static_cast<double>(items.size()) * ratio;
  const double nearest = std::round(raw);
  const auto n_train = static_cast<std::size_t>(std::abs(raw - nearest) < 1e-9 ? nearest : std::ceil(raw));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split split_dataset(const Dataset& ds, double ratio, std::uint64_t seed,
                    std::optional<sim::LoadCondition> only) {
  Split out;
  for (std::size_t t = 0; t < ds.trials().size(); ++t) {
    if (only && ds.trials()[t].load != *only) continue;
    std::vector<SampleRef> items;
    for (std::size_t k = 0; k < ds.trials()[t].records.size(); ++k) items.push_back({t, k});
    Split s = split(items, ratio, mix_seed(seed, label_tag(ds.trials()[t].load)));
    out.train.insert(out.train.end(), s.train.begin(), s.train.end());
    out.test.insert(out.test.end(), s.test.begin(), s.test.end());
  }
  if (out.train.empty() && out.test.empty()) throw ContractError("split: empty dataset");
  return out;
}

AuditReport audit(const Dataset& ds, double tolerance) {
  AuditReport report;
  const auto& cfg = ds.config();
  for (const Trial& trial : ds.trials()) {
    for (const Record& r : trial.records) {
      ++report.checked;
      const std::size_t last = r.window.dim(0) - 1;
      sim::TendonDisplacement q{};
      for (std::size_t a = 0; a < 4; ++a) q[a] = r.window[last * 4 + a];
      const PointCloud expect = sim::marker_positions(q, sim::load_for(r.load, cfg.load_magnitude), cfg.robot);
      double dev = 0.0;
      for (std::size_t i = 0; i < expect.size(); ++i) {
        for (std::size_t a = 0; a < 3; ++a) dev = std::max(dev, std::abs(expect[i][a] - r.truth[i][a]));
      }
      report.max_deviation = std::max(report.max_deviation, dev);
      if (dev <= tolerance) {
        ++report.passed;
      } else {
        report.failures.push_back(sim::to_string(r.load) + "/" + std::to_string(r.index));
      }
    }
  }
  return report;
}

std::uint64_t hash_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), dir));
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = kFnvOffset;
  for (const auto& rel : files) {
    h = fnv1a(h, rel.generic_string());
    h = fnv1a(h, std::string_view("\0", 1));
    std::ifstream in(dir / rel, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    h = fnv1a(h, buf.str());
  }
  return h;
}

}  // namespace stnet::data
