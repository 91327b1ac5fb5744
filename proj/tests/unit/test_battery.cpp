#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "stsdep/battery.hpp"
#include "stsdep/genrand.hpp"

using namespace stsdep;

TEST(Items, CanonicalEnumeration) {
  auto items = enumerate_items(BatteryParams::defaults_for(1000000));
  ASSERT_EQ(items.size(), 162u);
  EXPECT_EQ(items.front().item_id, "frequency");
  EXPECT_EQ(items.back().item_id, "linear-complexity");
  std::set<std::string> ids;
  std::size_t nonoverlap = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(items[i].index, i);
    ids.insert(items[i].item_id);
    if (items[i].item_id.starts_with("nonoverlap")) ++nonoverlap;
  }
  EXPECT_EQ(ids.size(), 162u);
  EXPECT_EQ(nonoverlap, 148u);
  EXPECT_EQ(items[8].item_id, "nonoverlap-000000001");
  EXPECT_EQ(items[155].item_id, "nonoverlap-111111110");
  EXPECT_EQ(items[156].item_id, "overlap");
  EXPECT_EQ(item_index("serial-2"), 160u);
  EXPECT_FALSE(find_item("random-excursions").has_value());
  EXPECT_THROW(item_index("bogus"), Error);
}

TEST(Params, DefaultsByN) {
  auto p6 = BatteryParams::defaults_for(1000000);
  EXPECT_EQ(p6.universal_L, 7u);
  EXPECT_EQ(p6.universal_Q, 1280u);
  EXPECT_EQ(p6.longest_run_M, 10000u);
  EXPECT_EQ(p6.block_frequency_M, 128u);
  EXPECT_EQ(p6.serial_m, 16u);
  EXPECT_EQ(p6.approx_entropy_m, 10u);
  EXPECT_EQ(p6.linear_complexity_M, 500u);
  EXPECT_TRUE(p6.warnings().empty());
  auto p5 = BatteryParams::defaults_for(100000);
  EXPECT_EQ(p5.universal_L, 5u);
  EXPECT_EQ(p5.longest_run_M, 128u);
  EXPECT_FALSE(p5.warnings().empty());
  EXPECT_EQ(BatteryParams::defaults_for(5000).longest_run_M, 8u);
  EXPECT_EQ(BatteryParams::universal_L_for(387840), 6u);
  EXPECT_EQ(BatteryParams::universal_L_for(1059061760), 16u);
}

TEST(Params, Validation) {
  auto p = BatteryParams::defaults_for(100000);
  p.template_length = 10;
  EXPECT_THROW(enumerate_items(p), Error);
  p = BatteryParams::defaults_for(100000);
  p.universal_Q = 10;
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
  }
}

TEST(ApplyItem, TooShortIsAnnotated) {
  auto p = BatteryParams::defaults_for(1000);
  auto s = mt19937_bits(1, 0, 1000);
  try {
    apply_item(s, canonical_items()[item_index("rank")], p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SequenceTooShort);
    EXPECT_TRUE(e.message().starts_with("rank: ")) << e.message();
  }
}

TEST(ApplyItem, LengthMustMatchParams) {
  auto s = mt19937_bits(1, 0, 1000);
  EXPECT_THROW(apply_item(s, canonical_items()[0], BatteryParams::defaults_for(999)), Error);
}

TEST(RunRow, RangeAndDeterminism) {
  const std::size_t n = 10000;
  auto p = BatteryParams::defaults_for(n);
  auto items = enumerate_items(p);
  auto s = mt19937_bits(7, 0, n);
  auto a = run_row(s, items, p);
  auto b = run_row(s, items, p);
  ASSERT_EQ(a.size(), 162u);
  EXPECT_EQ(a, b);
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (std::size_t i = 0; i < items.size(); i += 13) EXPECT_EQ(apply_item(s, items[i], p), a[i]);
}

// Equivalence with the reference C implementation on frozen inputs.
TEST(Reference, AllItemsWithinTolerance) {
  std::ifstream in(STSDEP_TEST_DATA "/reference_pvalues.json");
  ASSERT_TRUE(in);
  auto ref = nlohmann::json::parse(in);
  ASSERT_GE(ref.size(), 3u);
  for (auto& [file, entry] : ref.items()) {
    auto s = read_bin(std::string(STSDEP_TEST_DATA "/") + file);
    const std::size_t n = entry["n"];
    ASSERT_EQ(s.size(), n);
    auto p = BatteryParams::defaults_for(n);
    auto items = enumerate_items(p);
    auto row = run_row(s, items, p);
    std::size_t compared = 0;
    for (auto& item : items) {
      if (!entry["pvalues"].contains(item.item_id)) continue;
      const double want = entry["pvalues"][item.item_id];
      EXPECT_NEAR(row[item.index], want, 1e-4) << file << " " << item.item_id;
      ++compared;
    }
    EXPECT_GE(compared, 161u) << file;
  }
}
