#ifndef STSDEP_MINSET_HPP_
#define STSDEP_MINSET_HPP_

// Greedy removal of battery items to bring the indicator I back to 1.
//
// With C the sample covariance of the p-value columns, the variance of the
// row mean over an active set A of size k is S/k^2, S = sum_{a,b in A} C[a][b],
// so I(A) = sqrt(12 k S) / k. Removing c changes S to S - 2 R[c] + C[c][c]
// where R[c] = sum_{b in A} C[c][b].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsdep/depscope.hpp"
#include "stsdep/errors.hpp"
#include "stsdep/pmatrix.hpp"

namespace stsdep {

struct CovarianceSummary {
  std::size_t m = 0;
  std::vector<std::size_t> items;  // canonical index of each column
  std::vector<double> col_means;
  std::vector<double> C;  // k x k, row-major

  std::size_t k() const noexcept { return items.size(); }
  double at(std::size_t a, std::size_t b) const noexcept { return C[a * items.size() + b]; }

  std::size_t column_of(std::size_t item) const {
    auto it = std::lower_bound(items.begin(), items.end(), item);
    if (it == items.end() || *it != item) {
      throw Error(ErrorCode::UnknownItem, "item " + canonical_items()[item].item_id + " not in the matrix");
    }
    return static_cast<std::size_t>(it - items.begin());
  }

  // Pearson correlation of two columns (NaN if either is constant).
  double correlation(std::size_t a, std::size_t b) const {
    return at(a, b) / std::sqrt(at(a, a) * at(b, b));
  }
};

inline CovarianceSummary covariance_summary(const PValueMatrix& mat) {
  const std::size_t m = mat.rows(), k = mat.cols();
  if (m < 2) throw Error(ErrorCode::DegenerateSample, "covariance needs m >= 2");
  CovarianceSummary cov;
  cov.m = m;
  cov.items = mat.items();
  cov.col_means.assign(k, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) cov.col_means[c] += mat(j, c);
  }
  for (auto& mean : cov.col_means) mean /= static_cast<double>(m);

  // Centered columns, column-major, for contiguous dot products.
  std::vector<double> x(m * k);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) x[c * m + j] = mat(j, c) - cov.col_means[c];
  }
  cov.C.assign(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    const double* xa = &x[a * m];
    for (std::size_t b = a; b < k; ++b) {
      const double* xb = &x[b * m];
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += xa[j] * xb[j];
      const double c = sum / static_cast<double>(m - 1);
      cov.C[a * k + b] = c;
      cov.C[b * k + a] = c;
    }
  }
  return cov;
}

namespace detail {

inline double indicator_from_sum(double S, std::size_t k) {
  const double kd = static_cast<double>(k);
  return std::sqrt(12.0 * kd * std::max(S, 0.0)) / kd;
}

}  // namespace detail

inline double indicator_from_covariance(const CovarianceSummary& cov, const ActiveSet& active) {
  std::vector<std::size_t> cols;
  for (auto i : active.indices()) cols.push_back(cov.column_of(i));
  double S = 0.0;
  for (auto a : cols) {
    for (auto b : cols) S += cov.at(a, b);
  }
  return detail::indicator_from_sum(S, cols.size());
}

struct GreedyChoice {
  std::size_t item;  // canonical index
  double I;          // indicator after removing it
};

// Relative slack under which two candidate indicators count as tied; the
// lower canonical index then wins.
inline constexpr double kTieTolerance = 1e-12;

inline GreedyChoice greedy_step(const CovarianceSummary& cov, const ActiveSet& active) {
  const std::size_t k = active.size();
  if (k < 2) throw Error(ErrorCode::ActiveSetTooSmall, "greedy step needs k >= 2");
  std::vector<std::size_t> cols;
  for (auto i : active.indices()) cols.push_back(cov.column_of(i));
  std::vector<double> R(k, 0.0);
  double S = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) R[a] += cov.at(cols[a], cols[b]);
    S += R[a];
  }
  std::optional<GreedyChoice> best;
  for (std::size_t a = 0; a < k; ++a) {  // ascending canonical index
    const double S_after = S - 2.0 * R[a] + cov.at(cols[a], cols[a]);
    const double I = detail::indicator_from_sum(S_after, k - 1);
    if (!best || I < best->I - kTieTolerance * std::max(1.0, best->I)) {
      best = GreedyChoice{active.indices()[a], I};
    }
  }
  return *best;
}

struct StopRule {
  enum class Kind { Full, Threshold, KMin };
  Kind kind = Kind::Full;
  double delta = 0.01;    // "close to 1" means I <= 1 + delta
  std::size_t k_min = 1;  // Kind::KMin
};

struct GreedyStep {
  std::size_t removed;  // canonical index
  std::string removed_id;
  std::size_t k;  // remaining after removal
  double I;
};

struct GreedyTrajectory {
  ActiveSet initial = ActiveSet::full();
  double initial_I = 0.0;
  double delta = 0.01;
  std::vector<GreedyStep> steps;
  // Number of removals at which I first reached 1 + delta (0 = the initial set).
  std::optional<std::size_t> selected_removals;

  ActiveSet active_after(std::size_t removals) const {
    if (removals > steps.size()) throw Error(ErrorCode::OutOfRange, "trajectory is shorter than that");
    ActiveSet set = initial;
    for (std::size_t s = 0; s < removals; ++s) set = set.without(steps[s].removed);
    return set;
  }

  std::optional<ActiveSet> selected_set() const {
    if (!selected_removals) return std::nullopt;
    return active_after(*selected_removals);
  }

  // The K items that survive longest.
  ActiveSet last_survivors(std::size_t K) const {
    if (K == 0 || K > initial.size()) throw Error(ErrorCode::OutOfRange, "bad survivor count");
    return active_after(initial.size() - K);
  }

  // Items still active at the end of the run.
  ActiveSet final_set() const { return active_after(steps.size()); }
};

inline GreedyTrajectory greedy_run(const CovarianceSummary& cov, const StopRule& stop = {},
                                   std::optional<ActiveSet> start = std::nullopt) {
  GreedyTrajectory t;
  t.initial = start.value_or(ActiveSet::from_indices(cov.items));
  t.delta = stop.delta;
  t.initial_I = indicator_from_covariance(cov, t.initial);
  const double target = 1.0 + stop.delta;
  if (t.initial_I <= target) t.selected_removals = 0;
  ActiveSet active = t.initial;
  while (active.size() > 1) {
    if (stop.kind == StopRule::Kind::Threshold && t.selected_removals) break;
    if (stop.kind == StopRule::Kind::KMin && active.size() <= stop.k_min) break;
    const auto choice = greedy_step(cov, active);
    active = active.without(choice.item);
    t.steps.push_back({choice.item, canonical_items()[choice.item].item_id, active.size(), choice.I});
    if (!t.selected_removals && choice.I <= target) t.selected_removals = t.steps.size();
  }
  return t;
}

inline GreedyTrajectory greedy_run(const PValueMatrix& mat, const StopRule& stop = {}) {
  return greedy_run(covariance_summary(mat), stop);
}

struct OverlapStats {
  std::size_t observed;
  double expected;
  double sd;
};

// |A & B| against the hypergeometric law of the overlap of two uniformly
// random K-subsets of an N-set.
inline OverlapStats overlap_stats(const ActiveSet& a, const ActiveSet& b, std::size_t universe) {
  const std::size_t K = a.size();
  if (b.size() != K) {
    throw Error(ErrorCode::SizeMismatch, "sets have " + std::to_string(a.size()) + " and " +
                                             std::to_string(b.size()) + " items");
  }
  if (K > universe) throw Error(ErrorCode::SizeMismatch, "set larger than universe");
  std::vector<std::size_t> common;
  std::set_intersection(a.indices().begin(), a.indices().end(), b.indices().begin(), b.indices().end(),
                        std::back_inserter(common));
  const double Kd = static_cast<double>(K), N = static_cast<double>(universe);
  const double expected = Kd * Kd / N;
  const double var = universe > 1 ? Kd * (Kd / N) * ((N - Kd) / N) * ((N - Kd) / (N - 1)) : 0.0;
  return {common.size(), expected, std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// Export

inline std::string trajectory_csv(const GreedyTrajectory& t, const nlohmann::json& config) {
  std::string out = "# config: " + config.dump() + "\n";
  out += "# initial: " +
         nlohmann::json{{"k", t.initial.size()}, {"I", t.initial_I}, {"delta", t.delta},
                        {"selected_removals", t.selected_removals ? nlohmann::json(*t.selected_removals)
                                                                  : nlohmann::json(nullptr)}}
             .dump() +
         "\n";
  out += "step,removed_item,k,I\n";
  for (std::size_t s = 0; s < t.steps.size(); ++s) {
    out += std::to_string(s + 1) + "," + t.steps[s].removed_id + "," + std::to_string(t.steps[s].k) + "," +
           detail::format_double(t.steps[s].I) + "\n";
  }
  return out;
}

inline nlohmann::json trajectory_json(const GreedyTrajectory& t, const nlohmann::json& config) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t s = 0; s < t.steps.size(); ++s) {
    steps.push_back({{"step", s + 1}, {"removed_item", t.steps[s].removed_id}, {"k", t.steps[s].k},
                     {"I", t.steps[s].I}});
  }
  nlohmann::json selected = nullptr;
  if (auto set = t.selected_set()) selected = set->item_ids();
  return {{"config", config},
          {"initial", {{"k", t.initial.size()}, {"I", t.initial_I}}},
          {"delta", t.delta},
          {"selected_removals",
           t.selected_removals ? nlohmann::json(*t.selected_removals) : nlohmann::json(nullptr)},
          {"selected_set", selected},
          {"steps", steps}};
}

// Newline-delimited item ids.
inline std::string item_list(const ActiveSet& set) {
  std::string out;
  for (auto& id : set.item_ids()) out += id + "\n";
  return out;
}

// Reads an item list; blank lines and '#' comments are ignored.
inline ActiveSet parse_item_list(std::string_view text) {
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    ids.emplace_back(line);
  }
  return ActiveSet::from_ids(ids);
}

}  // namespace stsdep

#endif  // STSDEP_MINSET_HPP_
