#ifndef STSDEP_DEPSCOPE_HPP_
#define STSDEP_DEPSCOPE_HPP_

// Per-sequence averages of p-values and how far their spread departs from the
// independent-items prediction sd = 1/sqrt(12k).
//
// Summations run in a fixed order (ascending sequence, then ascending item) so
// results are bit-stable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsdep/battery.hpp"
#include "stsdep/detail/special_functions.hpp"
#include "stsdep/errors.hpp"
#include "stsdep/pmatrix.hpp"

namespace stsdep {

// Sorted, distinct canonical item indices.
class ActiveSet {
 public:
  static ActiveSet full() { return ActiveSet(PValueMatrix::all_items()); }

  static ActiveSet from_indices(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
      throw Error(ErrorCode::InvalidParams, "active set has duplicate items");
    }
    return ActiveSet(std::move(indices));
  }

  static ActiveSet from_ids(const std::vector<std::string>& ids) {
    std::vector<std::size_t> idx;
    for (auto& id : ids) idx.push_back(item_index(id));
    return from_indices(std::move(idx));
  }

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }

  bool contains(std::size_t item) const {
    return std::binary_search(indices_.begin(), indices_.end(), item);
  }

  ActiveSet without(std::size_t item) const {
    std::vector<std::size_t> rest;
    for (auto i : indices_) {
      if (i != item) rest.push_back(i);
    }
    return ActiveSet(std::move(rest));
  }

  std::vector<std::string> item_ids() const {
    std::vector<std::string> out;
    for (auto i : indices_) out.push_back(canonical_items()[i].item_id);
    return out;
  }

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

 private:
  explicit ActiveSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw Error(ErrorCode::EmptyActiveSet, "active set is empty");
    if (indices_.back() >= kBatterySize) {
      throw Error(ErrorCode::OutOfRange, "item index " + std::to_string(indices_.back()));
    }
  }

  std::vector<std::size_t> indices_;
};

enum class QMode { Plain, Scrambled };

inline std::string_view to_string(QMode mode) { return mode == QMode::Plain ? "plain" : "scrambled"; }

struct QSample {
  std::vector<double> values;
  QMode mode;
  ActiveSet active;
};

namespace detail {

inline std::vector<std::size_t> active_columns(const PValueMatrix& mat, const ActiveSet& active) {
  std::vector<std::size_t> cols;
  for (auto i : active.indices()) {
    auto c = mat.column_of(i);
    if (!c) {
      throw Error(ErrorCode::UnknownItem,
                  "item " + canonical_items()[i].item_id + " not present in the matrix");
    }
    cols.push_back(*c);
  }
  return cols;
}

}  // namespace detail

inline QSample q_stat(const PValueMatrix& mat, const ActiveSet& active) {
  const auto cols = detail::active_columns(mat, active);
  const double k = static_cast<double>(cols.size());
  std::vector<double> q(mat.rows());
  for (std::size_t j = 0; j < mat.rows(); ++j) {
    double sum = 0.0;
    for (auto c : cols) sum += mat(j, c);
    q[j] = sum / k;
  }
  return {std::move(q), QMode::Plain, active};
}

// Item i (1-based canonical position) is read from row ((j-1+i) mod m)+1 for
// row j, i.e. each column is rotated by its own item number.
inline QSample scrambled_q(const PValueMatrix& mat, const ActiveSet& active) {
  const auto cols = detail::active_columns(mat, active);
  const std::size_t m = mat.rows();
  const double k = static_cast<double>(cols.size());
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::size_t a = 0; a < cols.size(); ++a) {
      const std::size_t shift = (active.indices()[a] + 1) % m;
      sum += mat((j + shift) % m, cols[a]);
    }
    q[j] = sum / k;
  }
  return {std::move(q), QMode::Scrambled, active};
}

inline double theoretical_sd(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::EmptyActiveSet, "k must be >= 1");
  return 1.0 / std::sqrt(12.0 * static_cast<double>(k));
}

inline double sample_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Unbiased (m-1) sample standard deviation, two-pass on values shifted by the
// first one (so a constant sample gives exactly 0).
inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw Error(ErrorCode::DegenerateSample, "need at least 2 values");
  const double shift = v.front();
  double sum = 0.0;
  for (double x : v) sum += x - shift;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - shift - mean) * (x - shift - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double indicator_I(const QSample& q) {
  if (q.values.size() < 2) throw Error(ErrorCode::DegenerateSample, "indicator needs m >= 2");
  return sample_sd(q.values) / theoretical_sd(q.active.size());
}

// counts[0] is the underflow bin, counts[bins + 1] the overflow bin; interior
// bin b (1..bins) covers [edges[b-1], edges[b]).
struct HistogramData {
  std::size_t bins = 0;
  std::vector<double> edges;
  std::vector<double> centers;  // interior bins only
  std::vector<std::size_t> counts;
  std::vector<double> overlay;  // expected counts under N(1/2, sd^2), same layout as counts
  std::size_t m = 0;
  std::size_t k = 0;
  QMode mode = QMode::Plain;
  double mean = 0.0;
  double sd = 0.0;  // sample sd
  double theoretical_sd = 0.0;
  double I = 0.0;
};

inline constexpr std::size_t kDefaultBins = 201;

inline HistogramData histogram(const QSample& q, std::size_t bins = kDefaultBins) {
  if (bins < 2) throw Error(ErrorCode::InvalidParams, "need at least 2 bins");
  HistogramData h;
  h.bins = bins;
  h.m = q.values.size();
  h.k = q.active.size();
  h.mode = q.mode;
  h.theoretical_sd = theoretical_sd(h.k);
  const double lo = 0.5 - 8 * h.theoretical_sd;
  const double hi = 0.5 + 8 * h.theoretical_sd;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  for (std::size_t b = 0; b < bins; ++b) h.centers.push_back(lo + width * (static_cast<double>(b) + 0.5));

  h.counts.assign(bins + 2, 0);
  for (double x : q.values) {
    if (x < lo) {
      ++h.counts[0];
    } else if (x >= hi) {
      ++h.counts[bins + 1];
    } else {
      auto b = static_cast<std::size_t>((x - lo) / width);
      b = std::min(b, bins - 1);
      ++h.counts[b + 1];
    }
  }

  const double md = static_cast<double>(h.m);
  h.overlay.assign(bins + 2, 0.0);
  const double tail = math::normal_cdf(-8.0);
  h.overlay[0] = md * tail;
  h.overlay[bins + 1] = md * tail;
  for (std::size_t b = 0; b < bins; ++b) {
    const double z = (h.centers[b] - 0.5) / h.theoretical_sd;
    h.overlay[b + 1] = md * width * math::normal_pdf(z) / h.theoretical_sd;
  }

  if (h.m > 0) h.mean = sample_mean(q.values);
  if (h.m >= 2) {
    h.sd = sample_sd(q.values);
    h.I = h.sd / h.theoretical_sd;
  }
  return h;
}

struct ScalingRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  QMode mode = QMode::Plain;
  double sample_sd = 0.0;
  double theoretical_sd = 0.0;
  double I = 0.0;
};

struct TaggedMatrix {
  std::size_t n;
  const PValueMatrix* matrix;
};

// One plain and one scrambled row per matrix, in input order.
inline std::vector<ScalingRow> sd_scaling_report(const std::vector<TaggedMatrix>& matrices) {
  std::vector<ScalingRow> out;
  for (const auto& [n, mat] : matrices) {
    if (mat->cols() != kBatterySize) {
      throw Error(ErrorCode::InvalidParams, "scaling report needs the full 162-item matrix (n=" +
                                                std::to_string(n) + ")");
    }
    const auto active = ActiveSet::full();
    for (auto q : {q_stat(*mat, active), scrambled_q(*mat, active)}) {
      ScalingRow row;
      row.n = n;
      row.m = mat->rows();
      row.k = active.size();
      row.mode = q.mode;
      row.sample_sd = sample_sd(q.values);
      row.theoretical_sd = theoretical_sd(row.k);
      row.I = indicator_I(q);
      out.push_back(row);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export. CSV reports start with "# config: <json>".

inline std::string histogram_csv(const HistogramData& h, const nlohmann::json& config) {
  std::string out = "# config: " + config.dump() + "\n";
  out += "# summary: " +
         nlohmann::json{{"m", h.m}, {"k", h.k}, {"mode", to_string(h.mode)}, {"mean", h.mean},
                        {"sample_sd", h.sd}, {"theoretical_sd", h.theoretical_sd}, {"I", h.I}}
             .dump() +
         "\n";
  out += "bin,region,bin_lo,bin_hi,bin_center,count,overlay\n";
  auto line = [&](std::size_t b, const char* region, double lo, double hi, double center) {
    out += std::to_string(b) + "," + region + "," + detail::format_double(lo) + "," +
           detail::format_double(hi) + "," + detail::format_double(center) + "," +
           std::to_string(h.counts[b]) + "," + detail::format_double(h.overlay[b]) + "\n";
  };
  line(0, "underflow", -INFINITY, h.edges.front(), h.edges.front());
  for (std::size_t b = 1; b <= h.bins; ++b) line(b, "interior", h.edges[b - 1], h.edges[b], h.centers[b - 1]);
  line(h.bins + 1, "overflow", h.edges.back(), INFINITY, h.edges.back());
  return out;
}

inline nlohmann::json histogram_json(const HistogramData& h, const nlohmann::json& config) {
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < h.bins + 2; ++b) {
    const char* region = b == 0 ? "underflow" : b == h.bins + 1 ? "overflow" : "interior";
    const double center = b == 0 ? h.edges.front() : b == h.bins + 1 ? h.edges.back() : h.centers[b - 1];
    bins.push_back({{"bin", b}, {"region", region}, {"bin_center", center}, {"count", h.counts[b]},
                    {"overlay", h.overlay[b]}});
  }
  return {{"config", config},
          {"summary",
           {{"m", h.m}, {"k", h.k}, {"mode", to_string(h.mode)}, {"mean", h.mean}, {"sample_sd", h.sd},
            {"theoretical_sd", h.theoretical_sd}, {"I", h.I}}},
          {"bins", bins}};
}

inline std::string scaling_csv(const std::vector<ScalingRow>& rows, const nlohmann::json& config) {
  std::string out = "# config: " + config.dump() + "\n";
  out += "n,m,k,mode,sample_sd,theoretical_sd,I\n";
  for (auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.m) + "," + std::to_string(r.k) + "," +
           std::string(to_string(r.mode)) + "," + detail::format_double(r.sample_sd) + "," +
           detail::format_double(r.theoretical_sd) + "," + detail::format_double(r.I) + "\n";
  }
  return out;
}

inline nlohmann::json scaling_json(const std::vector<ScalingRow>& rows, const nlohmann::json& config) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& r : rows) {
    arr.push_back({{"n", r.n}, {"m", r.m}, {"k", r.k}, {"mode", to_string(r.mode)},
                   {"sample_sd", r.sample_sd}, {"theoretical_sd", r.theoretical_sd}, {"I", r.I}});
  }
  return {{"config", config}, {"rows", arr}};
}

}  // namespace stsdep

#endif  // STSDEP_DEPSCOPE_HPP_
