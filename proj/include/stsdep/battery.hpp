#ifndef STSDEP_BATTERY_HPP_
#define STSDEP_BATTERY_HPP_

// The 162-item battery: item enumeration, parameters, and per-sequence rows.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsdep/bitseq.hpp"
#include "stsdep/errors.hpp"
#include "stsdep/kinds.hpp"

namespace stsdep {

inline constexpr std::size_t kBatterySize = 162;
inline constexpr unsigned kTemplateLength = 9;

enum class ItemKind {
  Frequency,
  BlockFrequency,
  CusumFwd,
  CusumRev,
  Runs,
  LongestRun,
  Rank,
  Dft,
  NonOverlap,
  Overlap,
  Universal,
  ApproxEntropy,
  Serial1,
  Serial2,
  LinearComplexity,
};

inline std::string_view to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::Frequency: return "frequency";
    case ItemKind::BlockFrequency: return "block-frequency";
    case ItemKind::CusumFwd: return "cusum-fwd";
    case ItemKind::CusumRev: return "cusum-rev";
    case ItemKind::Runs: return "runs";
    case ItemKind::LongestRun: return "longest-run";
    case ItemKind::Rank: return "rank";
    case ItemKind::Dft: return "dft";
    case ItemKind::NonOverlap: return "nonoverlap";
    case ItemKind::Overlap: return "overlap";
    case ItemKind::Universal: return "universal";
    case ItemKind::ApproxEntropy: return "approx-entropy";
    case ItemKind::Serial1: return "serial-1";
    case ItemKind::Serial2: return "serial-2";
    case ItemKind::LinearComplexity: return "linear-complexity";
  }
  return "?";
}

struct TestItem {
  std::string item_id;
  ItemKind kind;
  std::size_t index;              // 0-based canonical position
  std::uint32_t template_bits = 0;  // nonoverlap only
};

struct BatteryParams {
  std::size_t n = 0;
  std::size_t block_frequency_M = 128;
  std::size_t longest_run_M = 10000;  // 8, 128 or 10000
  unsigned template_length = kTemplateLength;
  unsigned universal_L = 7;
  std::size_t universal_Q = 1280;
  unsigned approx_entropy_m = 10;
  unsigned serial_m = 16;
  std::size_t linear_complexity_M = 500;
  bool dft_corrected_variance = false;

  static std::size_t longest_run_block_for(std::size_t n) {
    return n < 6272 ? 8 : n < 750000 ? 128 : 10000;
  }

  // Block length L of the universal test by n. Below the reference table's
  // first threshold L = 5 is used rather than refusing.
  static unsigned universal_L_for(std::size_t n) {
    static constexpr std::array<std::size_t, 11> thresholds = {
        387840, 904960, 2068480, 4654080, 10342400, 22753280,
        49643520, 107560960, 231669760, 496435200, 1059061760};
    unsigned L = 5;
    for (std::size_t t : thresholds) {
      if (n >= t) ++L;
    }
    return L;
  }

  static BatteryParams defaults_for(std::size_t n) {
    BatteryParams p;
    p.n = n;
    p.longest_run_M = longest_run_block_for(n);
    p.universal_L = universal_L_for(n);
    p.universal_Q = std::size_t{10} << p.universal_L;
    return p;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
    if (n == 0) fail("n must be positive");
    if (block_frequency_M == 0) fail("block-frequency M must be positive");
    if (longest_run_M != 8 && longest_run_M != 128 && longest_run_M != 10000) {
      fail("longest-run M must be 8, 128 or 10000");
    }
    if (template_length != kTemplateLength) fail("template length is fixed at 9");
    if (universal_L < 1 || universal_L > 16) fail("universal L must be in 1..16");
    if (universal_Q < (std::size_t{10} << universal_L)) fail("universal Q must be >= 10*2^L");
    if (approx_entropy_m < 1 || approx_entropy_m > 20) fail("approx-entropy m must be in 1..20");
    if (serial_m < 2 || serial_m > 20) fail("serial m must be in 2..20");
    if (linear_complexity_M < 2) fail("linear-complexity M must be >= 2");
  }

  // Shortest n for which each kind is defined at these parameters.
  std::size_t hard_minimum(ItemKind kind) const {
    switch (kind) {
      case ItemKind::BlockFrequency: return block_frequency_M;
      case ItemKind::Runs:
      case ItemKind::Dft: return 2;
      case ItemKind::LongestRun:
        return longest_run_M == 8 ? 128 : longest_run_M == 128 ? 6272 : 750000;
      case ItemKind::Rank: return 1024;
      case ItemKind::NonOverlap: return 8 * template_length;
      case ItemKind::Overlap: return 1032;
      case ItemKind::Universal: return universal_L * (universal_Q + 1);
      case ItemKind::LinearComplexity: return linear_complexity_M;
      default: return 1;
    }
  }

  // Kinds run below the standard's recommended input size.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    auto below = [&](std::string_view kind, std::size_t recommended, const std::string& note = "") {
      if (n < recommended) {
        out.push_back(std::string(kind) + ": n=" + std::to_string(n) + " below recommended " +
                      std::to_string(recommended) + note);
      }
    };
    below("frequency", 100);
    below("block-frequency", 100);
    below("cusum", 100);
    below("runs", 100);
    below("rank", 38912);
    below("dft", 1000);
    below("overlap", 1000000);
    below("universal", 387840, " (L=" + std::to_string(universal_L) + " used)");
    below("linear-complexity", 1000000);
    const int log2n = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    if (static_cast<int>(approx_entropy_m) >= log2n - 5) {
      out.push_back("approx-entropy: m=" + std::to_string(approx_entropy_m) +
                    " not below floor(log2 n)-5=" + std::to_string(log2n - 5));
    }
    if (static_cast<int>(serial_m) >= log2n - 2) {
      out.push_back("serial: m=" + std::to_string(serial_m) +
                    " not below floor(log2 n)-2=" + std::to_string(log2n - 2));
    }
    return out;
  }

  nlohmann::json to_json() const {
    return {{"n", n},
            {"block_frequency_M", block_frequency_M},
            {"longest_run_M", longest_run_M},
            {"template_length", template_length},
            {"universal_L", universal_L},
            {"universal_Q", universal_Q},
            {"approx_entropy_m", approx_entropy_m},
            {"serial_m", serial_m},
            {"linear_complexity_M", linear_complexity_M},
            {"dft_corrected_variance", dft_corrected_variance}};
  }

  friend bool operator==(const BatteryParams&, const BatteryParams&) = default;
};

// The fixed canonical item list.
inline const std::vector<TestItem>& canonical_items() {
  static const std::vector<TestItem> items = [] {
    std::vector<TestItem> out;
    auto add = [&](ItemKind kind, std::string id = "") {
      out.push_back({id.empty() ? std::string(to_string(kind)) : id, kind, out.size()});
    };
    for (auto k : {ItemKind::Frequency, ItemKind::BlockFrequency, ItemKind::CusumFwd,
                   ItemKind::CusumRev, ItemKind::Runs, ItemKind::LongestRun, ItemKind::Rank,
                   ItemKind::Dft}) {
      add(k);
    }
    for (std::uint32_t t : kinds::aperiodic_templates(kTemplateLength)) {
      std::string bits(kTemplateLength, '0');
      for (unsigned b = 0; b < kTemplateLength; ++b) {
        if ((t >> (kTemplateLength - 1 - b)) & 1u) bits[b] = '1';
      }
      add(ItemKind::NonOverlap, "nonoverlap-" + bits);
      out.back().template_bits = t;
    }
    for (auto k : {ItemKind::Overlap, ItemKind::Universal, ItemKind::ApproxEntropy,
                   ItemKind::Serial1, ItemKind::Serial2, ItemKind::LinearComplexity}) {
      add(k);
    }
    return out;
  }();
  return items;
}

inline std::optional<std::size_t> find_item(std::string_view item_id) {
  static const auto index = [] {
    std::unordered_map<std::string, std::size_t> map;
    for (const auto& item : canonical_items()) map.emplace(item.item_id, item.index);
    return map;
  }();
  auto it = index.find(std::string(item_id));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

inline std::size_t item_index(std::string_view item_id) {
  auto idx = find_item(item_id);
  if (!idx) throw Error(ErrorCode::UnknownItem, "unknown item '" + std::string(item_id) + "'");
  return *idx;
}

inline std::vector<TestItem> enumerate_items(const BatteryParams& params) {
  params.validate();
  return canonical_items();
}

// Per-sequence evaluation. Multi-item kinds (cusum, serial, nonoverlap) and
// the circular pattern counts shared by serial and approx-entropy are computed
// once on first use.
class SequenceAnalysis {
 public:
  SequenceAnalysis(const BitSequence& s, const BatteryParams& params) : s_(s), p_(params) {
    if (s.size() != params.n) {
      throw Error(ErrorCode::InvalidParams, "sequence has " + std::to_string(s.size()) +
                                                " bits, params expect n=" + std::to_string(params.n));
    }
  }

  double evaluate(const TestItem& item) {
    try {
      const std::size_t minimum = p_.hard_minimum(item.kind);
      if (s_.size() < minimum) kinds::detail::too_short(to_string(item.kind).data(), s_.size(), minimum);
      return compute(item);
    } catch (const Error& e) {
      throw e.with_context(item.item_id);
    }
  }

 private:
  double compute(const TestItem& item) {
    switch (item.kind) {
      case ItemKind::Frequency: return kinds::frequency(s_);
      case ItemKind::BlockFrequency: return kinds::block_frequency(s_, p_.block_frequency_M);
      case ItemKind::CusumFwd: return cusum().first;
      case ItemKind::CusumRev: return cusum().second;
      case ItemKind::Runs: return kinds::runs(s_);
      case ItemKind::LongestRun: return kinds::longest_run_of_ones(s_, p_.longest_run_M);
      case ItemKind::Rank: return kinds::rank(s_);
      case ItemKind::Dft: return kinds::dft(s_, p_.dft_corrected_variance);
      case ItemKind::NonOverlap: return nonoverlap(item.template_bits);
      case ItemKind::Overlap: return kinds::overlapping_template(s_, p_.template_length);
      case ItemKind::Universal: return kinds::universal(s_, p_.universal_L, p_.universal_Q);
      case ItemKind::ApproxEntropy:
        return kinds::approximate_entropy_from_counts(counts(p_.approx_entropy_m + 1),
                                                      p_.approx_entropy_m, s_.size());
      case ItemKind::Serial1: return serial().first;
      case ItemKind::Serial2: return serial().second;
      case ItemKind::LinearComplexity: return kinds::linear_complexity(s_, p_.linear_complexity_M);
    }
    throw Error(ErrorCode::InvalidParams, "unhandled item kind");
  }

  const kinds::PValuePair& cusum() {
    if (!cusum_) cusum_ = kinds::cumulative_sums(s_);
    return *cusum_;
  }

  const kinds::PValuePair& serial() {
    if (!serial_) serial_ = kinds::serial_from_counts(counts(p_.serial_m), p_.serial_m, s_.size());
    return *serial_;
  }

  double nonoverlap(std::uint32_t bits) {
    if (nonoverlap_.empty()) {
      templates_ = kinds::aperiodic_templates(p_.template_length);
      nonoverlap_ = kinds::non_overlapping_templates(s_, p_.template_length, templates_);
    }
    auto it = std::lower_bound(templates_.begin(), templates_.end(), bits);
    return nonoverlap_[static_cast<std::size_t>(it - templates_.begin())];
  }

  // Circular counts for `width`, derived from one table at the widest width needed.
  std::vector<std::uint32_t> counts(unsigned width) {
    const unsigned top = std::max(p_.serial_m, p_.approx_entropy_m + 1);
    if (top_counts_.empty()) top_counts_ = kinds::circular_pattern_counts(s_, top);
    std::vector<std::uint32_t> c = top_counts_;
    for (unsigned w = top; w > width; --w) c = kinds::marginalize(c);
    return c;
  }

  const BitSequence& s_;
  const BatteryParams& p_;
  std::optional<kinds::PValuePair> cusum_;
  std::optional<kinds::PValuePair> serial_;
  std::vector<std::uint32_t> templates_;
  std::vector<double> nonoverlap_;
  std::vector<std::uint32_t> top_counts_;
};

inline double apply_item(const BitSequence& s, const TestItem& item, const BatteryParams& params) {
  SequenceAnalysis analysis(s, params);
  return analysis.evaluate(item);
}

inline std::vector<double> run_row(const BitSequence& s, const std::vector<TestItem>& items,
                                   const BatteryParams& params) {
  SequenceAnalysis analysis(s, params);
  std::vector<double> row;
  row.reserve(items.size());
  for (const auto& item : items) row.push_back(analysis.evaluate(item));
  return row;
}

}  // namespace stsdep

#endif  // STSDEP_BATTERY_HPP_
