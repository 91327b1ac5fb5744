#ifndef STSDEP_DETAIL_FFT_HPP_
#define STSDEP_DETAIL_FFT_HPP_

// Real-input DFT magnitudes backed by FFTW. Plans are created once per length
// under a lock; execution on fresh buffers is thread-safe.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "stsdep/errors.hpp"

namespace stsdep::detail {

class RealFftPlans {
 public:
  static RealFftPlans& instance() {
    static RealFftPlans plans;
    return plans;
  }

  fftw_plan plan_for(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw Error(ErrorCode::NumericalFailure, "FFTW planning failed");
    plans_.emplace(n, plan);
    return plan;
  }

  RealFftPlans(const RealFftPlans&) = delete;
  RealFftPlans& operator=(const RealFftPlans&) = delete;

 private:
  RealFftPlans() = default;
  ~RealFftPlans() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// |X_k| for k = 0 .. count-1 where X is the DFT of `input` (count <= n/2 + 1).
inline std::vector<double> dft_magnitudes(std::span<const double> input, std::size_t count) {
  const std::size_t n = input.size();
  fftw_plan plan = RealFftPlans::instance().plan_for(n);
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  std::copy(input.begin(), input.end(), in.get());
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<double> mags(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double re = out.get()[k][0];
    const double im = out.get()[k][1];
    mags[k] = std::sqrt(re * re + im * im);
  }
  return mags;
}

}  // namespace stsdep::detail

#endif  // STSDEP_DETAIL_FFT_HPP_
