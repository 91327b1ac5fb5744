#ifndef STSDEP_KINDS_HPP_
#define STSDEP_KINDS_HPP_

// Statistics of the individual SP800-22 test kinds. Each function mirrors the
// reference C code closely, including its quirks (integer truncation in the
// cusum sums, the partial-row elimination of the rank test), because matching
// its output is the point.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stsdep/bitseq.hpp"
#include "stsdep/detail/fft.hpp"
#include "stsdep/detail/special_functions.hpp"
#include "stsdep/errors.hpp"

namespace stsdep::kinds {

struct PValuePair {
  double first;
  double second;
};

namespace detail {

[[noreturn]] inline void too_short(const char* kind, std::size_t n, std::size_t minimum) {
  throw Error(ErrorCode::SequenceTooShort, std::string(kind) + " needs n >= " +
                                               std::to_string(minimum) + ", got " +
                                               std::to_string(n));
}

// NaN is an error; values a hair outside [0,1] from cancellation get clamped.
inline double checked_p(double p, const char* kind) {
  if (std::isnan(p) || p < -1e-9 || p > 1 + 1e-9) {
    throw Error(ErrorCode::NumericalFailure,
                std::string(kind) + " produced p-value " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

inline std::size_t count_ones(const BitSequence& s, std::size_t start, std::size_t len) {
  std::size_t total = 0;
  while (len >= 64) {
    total += static_cast<std::size_t>(std::popcount(s.window64(start)));
    start += 64;
    len -= 64;
  }
  if (len > 0) total += static_cast<std::size_t>(std::popcount(s.window64(start) >> (64 - len)));
  return total;
}

}  // namespace detail

inline double frequency(const BitSequence& s) {
  const double n = static_cast<double>(s.size());
  const double sum = 2.0 * static_cast<double>(s.ones()) - n;
  const double s_obs = std::fabs(sum) / std::sqrt(n);
  return detail::checked_p(std::erfc(s_obs / std::sqrt(2.0)), "frequency");
}

inline double block_frequency(const BitSequence& s, std::size_t M) {
  const std::size_t N = s.size() / M;
  if (M == 0 || N == 0) detail::too_short("block-frequency", s.size(), M);
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double pi = static_cast<double>(detail::count_ones(s, i * M, M)) / static_cast<double>(M);
    const double v = pi - 0.5;
    sum += v * v;
  }
  const double chi2 = 4.0 * static_cast<double>(M) * sum;
  return detail::checked_p(math::igamc(static_cast<double>(N) / 2.0, chi2 / 2.0), "block-frequency");
}

// Forward and reverse cumulative sums.
inline PValuePair cumulative_sums(const BitSequence& s) {
  const long long n = static_cast<long long>(s.size());
  long long S = 0, sup = 0, inf = 0;
  for (long long k = 0; k < n; ++k) {
    S += s[static_cast<std::size_t>(k)] ? 1 : -1;
    sup = std::max(sup, S);
    inf = std::min(inf, S);
  }
  const long long z_fwd = std::max(sup, -inf);
  const long long z_rev = std::max(sup - S, S - inf);
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  auto p_of = [&](long long z) {
    if (z == 0) return 1.0;  // unreachable for n >= 1; guards the divisions
    double sum1 = 0.0;
    for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
      sum1 += math::normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
      sum1 -= math::normal_cdf(static_cast<double>((4 * k - 1) * z) / sqrt_n);
    }
    double sum2 = 0.0;
    for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
      sum2 += math::normal_cdf(static_cast<double>((4 * k + 3) * z) / sqrt_n);
      sum2 -= math::normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
    }
    return 1.0 - sum1 + sum2;
  };
  return {detail::checked_p(p_of(z_fwd), "cusum-fwd"), detail::checked_p(p_of(z_rev), "cusum-rev")};
}

inline double runs(const BitSequence& s) {
  const std::size_t n = s.size();
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(s.ones()) / nd;
  if (std::fabs(pi - 0.5) > 2.0 / std::sqrt(nd)) return 0.0;

  // Transitions between bit i and i+1, 63 at a time.
  std::size_t transitions = 0;
  for (std::size_t i = 0; i + 1 < n; i += 63) {
    const std::uint64_t x = s.window64(i);
    std::uint64_t y = x ^ (x << 1);
    const std::size_t span = std::min<std::size_t>(63, n - 1 - i);
    y &= ~std::uint64_t{0} << (64 - span);
    transitions += static_cast<std::size_t>(std::popcount(y));
  }
  const double v_obs = static_cast<double>(transitions + 1);
  const double erfc_arg =
      std::fabs(v_obs - 2.0 * nd * pi * (1 - pi)) / (2.0 * pi * (1 - pi) * std::sqrt(2 * nd));
  return detail::checked_p(std::erfc(erfc_arg), "runs");
}

// M selects the reference table: 8, 128 or 10000 bits per block.
inline double longest_run_of_ones(const BitSequence& s, std::size_t M) {
  const std::size_t n = s.size();
  std::size_t K;
  std::array<unsigned, 7> V{};
  std::array<double, 7> pi{};
  if (M == 8) {
    K = 3;
    V = {1, 2, 3, 4};
    pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
  } else if (M == 128) {
    K = 5;
    V = {4, 5, 6, 7, 8, 9};
    pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
  } else if (M == 10000) {
    K = 6;
    V = {10, 11, 12, 13, 14, 15, 16};
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  } else {
    throw Error(ErrorCode::InvalidParams, "longest-run M must be 8, 128 or 10000");
  }
  if (n < M) detail::too_short("longest-run", n, M);
  const std::size_t N = n / M;
  std::array<double, 7> nu{};
  for (std::size_t i = 0; i < N; ++i) {
    unsigned v_n = 0, run = 0;
    for (std::size_t j = 0; j < M; ++j) {
      if (s[i * M + j]) {
        v_n = std::max(v_n, ++run);
      } else {
        run = 0;
      }
    }
    if (v_n < V[0]) {
      nu[0] += 1;
    } else if (v_n > V[K]) {
      nu[K] += 1;
    } else {
      for (std::size_t j = 0; j <= K; ++j) {
        if (v_n == V[j]) nu[j] += 1;
      }
    }
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i <= K; ++i) {
    const double e = static_cast<double>(N) * pi[i];
    chi2 += (nu[i] - e) * (nu[i] - e) / e;
  }
  return detail::checked_p(math::igamc(static_cast<double>(K) / 2.0, chi2 / 2.0), "longest-run");
}

// Rank of a 32x32 GF(2) matrix (row i, column j = bit 31-j of rows[i]) using
// the reference elimination order, which only clears columns >= i on the
// forward pass.
inline int reference_rank32(std::array<std::uint32_t, 32> A) {
  auto bit = [&](int r, int c) { return (A[static_cast<std::size_t>(r)] >> (31 - c)) & 1u; };
  auto swap_in_pivot = [&](int i, int step) {
    for (int idx = i + step; idx >= 0 && idx < 32; idx += step) {
      if (bit(idx, i)) {
        std::swap(A[static_cast<std::size_t>(i)], A[static_cast<std::size_t>(idx)]);
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < 31; ++i) {
    if (bit(i, i) || swap_in_pivot(i, +1)) {
      const std::uint32_t mask = 0xFFFFFFFFu >> i;
      for (int j = i + 1; j < 32; ++j) {
        if (bit(j, i)) A[static_cast<std::size_t>(j)] ^= A[static_cast<std::size_t>(i)] & mask;
      }
    }
  }
  for (int i = 31; i > 0; --i) {
    if (bit(i, i) || swap_in_pivot(i, -1)) {
      for (int j = i - 1; j >= 0; --j) {
        if (bit(j, i)) A[static_cast<std::size_t>(j)] ^= A[static_cast<std::size_t>(i)];
      }
    }
  }
  int rank = 32;
  for (auto row : A) {
    if (row == 0) --rank;
  }
  return rank;
}

inline double rank(const BitSequence& s) {
  const std::size_t N = s.size() / 1024;
  if (N == 0) detail::too_short("rank", s.size(), 1024);

  auto prob = [](int r) {
    double product = 1.0;
    for (int i = 0; i <= r - 1; ++i) {
      product *= ((1.e0 - std::pow(2, i - 32)) * (1.e0 - std::pow(2, i - 32))) /
                 (1.e0 - std::pow(2, i - r));
    }
    return std::pow(2, r * (32 + 32 - r) - 32 * 32) * product;
  };
  const double p_32 = prob(32);
  const double p_31 = prob(31);
  const double p_30 = 1 - (p_32 + p_31);

  double F_32 = 0, F_31 = 0;
  std::array<std::uint32_t, 32> rows{};
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t i = 0; i < 32; ++i) rows[i] = s.window(k * 1024 + i * 32, 32);
    const int r = reference_rank32(rows);
    if (r == 32) F_32 += 1;
    if (r == 31) F_31 += 1;
  }
  const double Nd = static_cast<double>(N);
  const double F_30 = Nd - (F_32 + F_31);
  const double chi2 = ((F_32 - Nd * p_32) * (F_32 - Nd * p_32) / (Nd * p_32)) +
                      ((F_31 - Nd * p_31) * (F_31 - Nd * p_31) / (Nd * p_31)) +
                      ((F_30 - Nd * p_30) * (F_30 - Nd * p_30) / (Nd * p_30));
  return detail::checked_p(std::exp(-chi2 / 2.e0), "rank");
}

// corrected_variance switches the reference variance n*0.95*0.05/4 to the
// n*0.95*0.05/3.8 later proposed by Kim, Umeno and Hasegawa.
inline double dft(const BitSequence& s, bool corrected_variance = false) {
  const std::size_t n = s.size();
  if (n < 2) detail::too_short("dft", n, 2);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = s[i] ? 1.0 : -1.0;
  const auto mags = stsdep::detail::dft_magnitudes(x, n / 2);
  const double nd = static_cast<double>(n);
  const double upper = std::sqrt(2.995732274 * nd);
  std::size_t count = 0;
  for (double m : mags) {
    if (m < upper) ++count;
  }
  const double N_l = static_cast<double>(count);
  const double N_o = 0.95 * nd / 2.0;
  const double var = corrected_variance ? nd * 0.95 * 0.05 / 3.8 : nd / 4.0 * 0.95 * 0.05;
  const double d = (N_l - N_o) / std::sqrt(var);
  return detail::checked_p(std::erfc(std::fabs(d) / std::sqrt(2.0)), "dft");
}

// Aperiodic m-bit templates (no proper prefix equals the suffix of the same
// length), ascending.
inline std::vector<std::uint32_t> aperiodic_templates(unsigned m) {
  if (m < 1 || m > 20) throw Error(ErrorCode::InvalidParams, "template length out of range");
  std::vector<std::uint32_t> out;
  for (std::uint32_t t = 0; t < (1u << m); ++t) {
    bool aperiodic = true;
    for (unsigned shift = 1; shift < m && aperiodic; ++shift) {
      const std::uint32_t overlap_mask = (1u << (m - shift)) - 1;
      if ((t >> shift) == (t & overlap_mask)) aperiodic = false;
    }
    if (aperiodic) out.push_back(t);
  }
  return out;
}

// One p-value per template, all templates in one pass over the sequence.
inline std::vector<double> non_overlapping_templates(const BitSequence& s, unsigned m,
                                                     const std::vector<std::uint32_t>& templates) {
  constexpr std::size_t N = 8;
  const std::size_t n = s.size();
  const std::size_t M = n / N;
  if (M < m) detail::too_short("nonoverlap", n, N * m);
  const double lambda = static_cast<double>(M - m + 1) / std::pow(2, m);
  const double varWj =
      static_cast<double>(M) * (1.0 / std::pow(2.0, m) - (2.0 * m - 1.0) / std::pow(2.0, 2.0 * m));

  std::vector<int> slot(std::size_t{1} << m, -1);
  for (std::size_t t = 0; t < templates.size(); ++t) slot.at(templates[t]) = static_cast<int>(t);

  const std::size_t T = templates.size();
  std::vector<std::array<double, N>> W(T);
  std::vector<std::size_t> next(T);
  for (std::size_t i = 0; i < N; ++i) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t j = 0; j + m <= M; ++j) {
      const int t = slot[s.window(i * M + j, m)];
      if (t >= 0 && j >= next[static_cast<std::size_t>(t)]) {
        W[static_cast<std::size_t>(t)][i] += 1;
        next[static_cast<std::size_t>(t)] = j + m;
      }
    }
  }
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) chi2 += std::pow((W[t][i] - lambda) / std::pow(varWj, 0.5), 2);
    out[t] = detail::checked_p(math::igamc(N / 2.0, chi2 / 2.0), "nonoverlap");
  }
  return out;
}

// Template of m ones, blocks of 1032 bits.
inline double overlapping_template(const BitSequence& s, unsigned m) {
  constexpr std::size_t M = 1032;
  constexpr int K = 5;
  const std::size_t n = s.size();
  const std::size_t N = n / M;
  if (N == 0) detail::too_short("overlap", n, M);
  const double lambda = static_cast<double>(M - m + 1) / std::pow(2, m);
  const double eta = lambda / 2.0;

  auto Pr = [](int u, double eta) {
    if (u == 0) return std::exp(-eta);
    double sum = 0.0;
    for (int l = 1; l <= u; ++l) {
      sum += std::exp(-eta - u * std::log(2) + l * std::log(eta) - std::lgamma(l + 1) +
                      std::lgamma(u) - std::lgamma(l) - std::lgamma(u - l + 1));
    }
    return sum;
  };
  std::array<double, K + 1> pi{};
  double sum = 0.0;
  for (int i = 0; i < K; ++i) {
    pi[static_cast<std::size_t>(i)] = Pr(i, eta);
    sum += pi[static_cast<std::size_t>(i)];
  }
  pi[K] = 1 - sum;

  const std::uint32_t ones = (m == 32) ? 0xFFFFFFFFu : (1u << m) - 1;
  std::array<double, K + 1> nu{};
  for (std::size_t i = 0; i < N; ++i) {
    int W_obs = 0;
    for (std::size_t j = 0; j + m <= M; ++j) {
      if (s.window(i * M + j, m) == ones) ++W_obs;
    }
    nu[static_cast<std::size_t>(std::min(W_obs, K))] += 1;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i <= K; ++i) {
    const double e = static_cast<double>(N) * pi[i];
    chi2 += (nu[i] - e) * (nu[i] - e) / e;
  }
  return detail::checked_p(math::igamc(K / 2.0, chi2 / 2.0), "overlap");
}

// Maurer's expected value and variance of the per-block statistic, L = 1..16.
inline constexpr std::array<double, 17> kUniversalExpected = {
    0, 0.7326495, 1.5374383, 2.4016068, 3.3112247, 4.2534266, 5.2177052, 6.1962507, 7.1836656,
    8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070, 13.167693, 14.167488, 15.167379};
inline constexpr std::array<double, 17> kUniversalVariance = {
    0, 0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238,
    3.311, 3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421};

inline double universal(const BitSequence& s, unsigned L, std::size_t Q) {
  if (L < 1 || L > 16) throw Error(ErrorCode::InvalidParams, "universal L must be in 1..16");
  const std::size_t n = s.size();
  const std::size_t blocks = n / L;
  if (blocks <= Q) detail::too_short("universal", n, L * (Q + 1));
  const std::size_t K = blocks - Q;
  const double Kd = static_cast<double>(K);
  const double Ld = static_cast<double>(L);
  const double c = 0.7 - 0.8 / Ld + (4 + 32 / Ld) * std::pow(Kd, -3 / Ld) / 15;
  const double sigma = c * std::sqrt(kUniversalVariance[L] / Kd);

  std::vector<std::size_t> T(std::size_t{1} << L, 0);
  for (std::size_t i = 1; i <= Q; ++i) T[s.window((i - 1) * L, L)] = i;
  double sum = 0.0;
  for (std::size_t i = Q + 1; i <= Q + K; ++i) {
    const std::uint32_t dec = s.window((i - 1) * L, L);
    sum += std::log(static_cast<double>(i - T[dec])) / std::log(2);
    T[dec] = i;
  }
  const double phi = sum / Kd;
  const double arg_erfc = std::fabs(phi - kUniversalExpected[L]) / (std::sqrt(2) * sigma);
  return detail::checked_p(std::erfc(arg_erfc), "universal");
}

// Counts of every width-bit pattern over the n cyclic windows of s.
inline std::vector<std::uint32_t> circular_pattern_counts(const BitSequence& s, unsigned width) {
  if (width < 1 || width > 24) throw Error(ErrorCode::InvalidParams, "pattern width out of range");
  const std::size_t n = s.size();
  std::vector<std::uint32_t> counts(std::size_t{1} << width, 0);
  if (n >= width) {
    const std::size_t straight = n - width + 1;
    for (std::size_t i = 0; i < straight; ++i) ++counts[s.window(i, width)];
    for (std::size_t i = straight; i < n; ++i) {
      const unsigned head = static_cast<unsigned>(n - i);
      const unsigned tail = width - head;
      ++counts[(s.window(i, head) << tail) | s.window(0, tail)];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t v = 0;
      for (unsigned k = 0; k < width; ++k) v = (v << 1) | (s[(i + k) % n] ? 1u : 0u);
      ++counts[v];
    }
  }
  return counts;
}

// Counts for width-1 from counts for width (drops the last bit of each pattern).
inline std::vector<std::uint32_t> marginalize(const std::vector<std::uint32_t>& counts) {
  std::vector<std::uint32_t> out(counts.size() / 2);
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = counts[2 * v] + counts[2 * v + 1];
  return out;
}

// counts_m1 are the circular counts for width m+1.
inline double approximate_entropy_from_counts(const std::vector<std::uint32_t>& counts_m1,
                                              unsigned m, std::size_t n) {
  const double nd = static_cast<double>(n);
  auto phi = [&](const std::vector<std::uint32_t>& c) {
    double sum = 0.0;
    for (auto v : c) {
      if (v > 0) sum += static_cast<double>(v) * std::log(static_cast<double>(v) / nd);
    }
    return sum / nd;
  };
  const double phi_m1 = phi(counts_m1);
  const double phi_m = m == 0 ? 0.0 : phi(marginalize(counts_m1));
  const double apen = phi_m - phi_m1;
  const double chi2 = 2.0 * nd * (std::log(2) - apen);
  return detail::checked_p(math::igamc(std::pow(2, m - 1.0), chi2 / 2.0), "approx-entropy");
}

inline double approximate_entropy(const BitSequence& s, unsigned m) {
  return approximate_entropy_from_counts(circular_pattern_counts(s, m + 1), m, s.size());
}

// counts_m are the circular counts for width m (m >= 2).
inline PValuePair serial_from_counts(const std::vector<std::uint32_t>& counts_m, unsigned m,
                                     std::size_t n) {
  const double nd = static_cast<double>(n);
  auto psi2 = [&](const std::vector<std::uint32_t>& c, unsigned width) {
    double sum = 0.0;
    for (auto v : c) sum += static_cast<double>(v) * static_cast<double>(v);
    return sum * std::pow(2, width) / nd - nd;
  };
  const auto counts_m1 = marginalize(counts_m);
  const double psim0 = psi2(counts_m, m);
  const double psim1 = psi2(counts_m1, m - 1);
  const double psim2 = m >= 3 ? psi2(marginalize(counts_m1), m - 2) : 0.0;
  const double del1 = psim0 - psim1;
  const double del2 = psim0 - 2.0 * psim1 + psim2;
  return {detail::checked_p(math::igamc(std::pow(2, m - 1) / 2, del1 / 2.0), "serial-1"),
          detail::checked_p(math::igamc(std::pow(2, m - 2) / 2, del2 / 2.0), "serial-2")};
}

inline PValuePair serial(const BitSequence& s, unsigned m) {
  if (m < 2) throw Error(ErrorCode::InvalidParams, "serial m must be >= 2");
  return serial_from_counts(circular_pattern_counts(s, m), m, s.size());
}

// Linear complexity of bits [start, start+len) by Berlekamp-Massey over GF(2),
// with connection polynomials packed 64 coefficients per word.
inline std::size_t berlekamp_massey(const BitSequence& s, std::size_t start, std::size_t len) {
  const std::size_t W = len / 64 + 2;
  // r holds the block reversed, LSB-first: bit t of r is s[start + len - 1 - t].
  std::vector<std::uint64_t> r(W + 1, 0);
  for (std::size_t t = 0; t < len; ++t) {
    if (s[start + len - 1 - t]) r[t / 64] |= std::uint64_t{1} << (t % 64);
  }
  std::vector<std::uint64_t> C(W, 0), B(W, 0), T;
  C[0] = B[0] = 1;
  std::size_t L = 0;
  long long m = -1;
  for (std::size_t N = 0; N < len; ++N) {
    // d = sum_{i=0..L} C_i s_{N-i}; s_{N-i} is bit (len-1-N+i) of r.
    const std::size_t off = len - 1 - N;
    const std::size_t w0 = off / 64, b = off % 64;
    const std::size_t words = L / 64 + 1;
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < words; ++k) {
      std::uint64_t piece = r[w0 + k] >> b;
      if (b != 0 && w0 + k + 1 < r.size()) piece |= r[w0 + k + 1] << (64 - b);
      acc ^= C[k] & piece;
    }
    // Coefficients above L are zero, so no masking is needed.
    if ((std::popcount(acc) & 1) == 0) continue;
    T = C;
    const std::size_t shift = N - static_cast<std::size_t>(m);
    const std::size_t ws = shift / 64, bs = shift % 64;
    for (std::size_t k = W; k-- > ws;) {
      std::uint64_t v = B[k - ws] << bs;
      if (bs != 0 && k > ws) v |= B[k - ws - 1] >> (64 - bs);
      C[k] ^= v;
    }
    if (2 * L <= N) {
      L = N + 1 - L;
      m = static_cast<long long>(N);
      B.swap(T);
    }
  }
  return L;
}

inline double linear_complexity(const BitSequence& s, std::size_t M) {
  const std::size_t N = s.size() / M;
  if (M < 2 || N == 0) detail::too_short("linear-complexity", s.size(), std::max<std::size_t>(M, 2));
  static constexpr std::array<double, 7> pi = {0.01047, 0.03125, 0.12500, 0.50000,
                                               0.25000, 0.06250, 0.020833};
  const double Md = static_cast<double>(M);
  const double sign = ((M + 1) % 2 == 0) ? -1.0 : 1.0;
  const double mean = Md / 2.0 + (9.0 + sign) / 36.0 - 1.0 / std::pow(2, Md) * (Md / 3.0 + 2.0 / 9.0);
  const double parity = (M % 2 == 0) ? 1.0 : -1.0;
  std::array<double, 7> nu{};
  for (std::size_t ii = 0; ii < N; ++ii) {
    const double L = static_cast<double>(berlekamp_massey(s, ii * M, M));
    const double T_ = parity * (L - mean) + 2.0 / 9.0;
    if (T_ <= -2.5) nu[0]++;
    else if (T_ > -2.5 && T_ <= -1.5) nu[1]++;
    else if (T_ > -1.5 && T_ <= -0.5) nu[2]++;
    else if (T_ > -0.5 && T_ <= 0.5) nu[3]++;
    else if (T_ > 0.5 && T_ <= 1.5) nu[4]++;
    else if (T_ > 1.5 && T_ <= 2.5) nu[5]++;
    else nu[6]++;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    const double e = static_cast<double>(N) * pi[i];
    chi2 += (nu[i] - e) * (nu[i] - e) / e;
  }
  return detail::checked_p(math::igamc(3.0, chi2 / 2.0), "linear-complexity");
}

}  // namespace stsdep::kinds

#endif  // STSDEP_KINDS_HPP_
