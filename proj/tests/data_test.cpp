#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "stnet/data.hpp"
#include "stnet/errors.hpp"

using namespace stnet;
using namespace stnet::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stnet_data_" + name);
  fs::remove_all(p);
  return p;
}

const fs::path& tiny_dataset() {
  static const fs::path dir = [] {
    const fs::path d = scratch("tiny");
    generate(default_generation("tiny", 3), d);
    return d;
  }();
  return dir;
}

std::vector<SampleRef> refs(std::size_t n) {
  std::vector<SampleRef> r;
  for (std::size_t k = 0; k < n; ++k) r.push_back({0, k});
  return r;
}

}  // namespace

TEST(Data, DeskDefaultsGive880SamplesPerTrial) {
  const GenerationConfig cfg = default_generation("desk", 0);
  EXPECT_EQ(cfg.samples_per_trial(), 880u);
  EXPECT_EQ(cfg.loads.size(), 4u);
}

TEST(Data, TinyDatasetLayoutAndAudit) {
  const Dataset ds = Dataset::open(tiny_dataset());
  ASSERT_EQ(ds.trials().size(), 4u);
  const char* names[] = {"trial_none", "trial_Fe1", "trial_Fe2", "trial_Fe3"};
  for (const char* n : names) EXPECT_TRUE(fs::exists(tiny_dataset() / n / "records.csv")) << n;
  EXPECT_TRUE(fs::exists(tiny_dataset() / "trial_Fe2" / "img_23.ppm"));
  const AuditReport a = audit(ds);
  EXPECT_EQ(a.checked, ds.size());
  EXPECT_EQ(a.passed, a.checked);
  EXPECT_EQ(a.max_deviation, 0.0);
}

TEST(Data, RegenerationIsHashIdentical) {
  const fs::path again = scratch("tiny_again");
  generate_from_manifest(tiny_dataset() / "manifest.json", again);
  EXPECT_EQ(hash_directory(again), hash_directory(tiny_dataset()));
  const fs::path other = scratch("tiny_other_seed");
  generate(default_generation("tiny", 4), other);
  EXPECT_NE(hash_directory(other), hash_directory(tiny_dataset()));
}

TEST(Data, WindowsAreLeftPaddedAndCausal) {
  std::vector<sim::TrajectoryStep> steps;
  for (int k = 0; k < 5; ++k) steps.push_back({{double(k), 0, double(-k), 0}, {}});
  const auto w = tendon_windows(steps, 3);
  // Sample 0: three copies of step 0; sample 1: steps 0, 0, 1; sample 4: steps 2, 3, 4.
  EXPECT_EQ(w[0][0], 0.0);
  EXPECT_EQ(w[1][4], 0.0);
  EXPECT_EQ(w[1][8], 1.0);
  EXPECT_EQ(w[4][0], 2.0);
  EXPECT_EQ(w[4][8], 4.0);
}

TEST(Data, RecordsRoundTripExactly) {
  const Dataset ds = Dataset::open(tiny_dataset());
  const fs::path p = scratch("records.csv");
  const auto& recs = ds.trials()[1].records;
  write_records(p, recs, ds.config().window, ds.config().robot.markers());
  const auto back = read_records(p, ds.config().window, ds.config().robot.markers());
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(back[k].window, recs[k].window);
    EXPECT_EQ(back[k].truth, recs[k].truth);
    EXPECT_EQ(back[k].load, recs[k].load);
  }
}

TEST(Data, ShortRowIsArityErrorNamingRowAndLine) {
  const fs::path p = scratch("short.csv");
  {
    std::ofstream out(p);
    out << records_header(1, 5) << "\n";
    out << "0,1,2,3,4";
    for (int i = 0; i < 15; ++i) out << ",0.5";
    out << ",none\n";
    out << "1,1,2,3,4";
    for (int i = 0; i < 14; ++i) out << ",0.5";
    out << ",none\n";
  }
  try {
    read_records(p, 1, 5);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(Data, SplitSizesAndProperties) {
  const Split s = split(refs(880), 0.8, 1);
  EXPECT_EQ(s.train.size(), 704u);
  EXPECT_EQ(s.test.size(), 176u);
  std::set<SampleRef> all(s.train.begin(), s.train.end());
  for (const auto& r : s.test) EXPECT_TRUE(all.insert(r).second);
  EXPECT_EQ(all.size(), 880u);
  EXPECT_EQ(split(refs(880), 0.8, 1).train, s.train);
  EXPECT_NE(split(refs(880), 0.8, 2).train, s.train);
  EXPECT_EQ(split(refs(7), 0.5, 0).train.size(), 4u);
  EXPECT_THROW(split({}, 0.8, 0), ContractError);
  EXPECT_THROW(split(refs(10), 1.0, 0), ContractError);
}

TEST(Data, StratifiedSplitKeepsRatioPerTrial) {
  const Dataset ds = Dataset::open(tiny_dataset());
  const Split s = split_dataset(ds, 0.75, 9);
  std::vector<std::size_t> per_trial(4, 0);
  for (const auto& r : s.train) ++per_trial[r.trial];
  for (std::size_t n : per_trial) EXPECT_EQ(n, 18u);
  const Split only = split_dataset(ds, 0.75, 9, sim::LoadCondition::Fe3);
  for (const auto& r : only.train) EXPECT_EQ(ds.trials()[r.trial].load, sim::LoadCondition::Fe3);
}

TEST(Data, UnwritableOutputFails) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  EXPECT_THROW(generate(default_generation("tiny", 0), blocker / "sub"), std::exception);
}
