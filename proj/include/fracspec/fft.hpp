#ifndef FRACSPEC_FFT_HPP
#define FRACSPEC_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fracspec/errors.hpp"

namespace fracspec {

namespace detail {

// FFTW planning and plan destruction are not thread safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanPtr = std::shared_ptr<fftw_plan_s>;

}  // namespace detail

/**
 * Real-input DFT of fixed length N and its unnormalised inverse.
 *
 *   forward:  X_k = sum_j x_j exp(-2 pi i jk / N),   k = 0..N/2
 *   inverse:  x_j = sum_k X_k exp(+2 pi i jk / N)    (Hermitian completion)
 *
 * Instances are immutable after construction and may be shared between
 * threads; each call uses caller-provided buffers.
 */
class RealDft {
 public:
  explicit RealDft(std::size_t n) : n_(n) {
    if (n == 0) throw domain_error("RealDft: zero length");
    std::vector<double> r(n);
    std::vector<std::complex<double>> c(n / 2 + 1);
    auto* rp = r.data();
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    const int len = static_cast<int>(n);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd_ = detail::PlanPtr(fftw_plan_dft_r2c_1d(len, rp, cp, FFTW_ESTIMATE | FFTW_UNALIGNED),
                           detail::PlanDeleter{});
    inv_ = detail::PlanPtr(fftw_plan_dft_c2r_1d(len, cp, rp, FFTW_ESTIMATE | FFTW_UNALIGNED),
                           detail::PlanDeleter{});
    if (!fwd_ || !inv_) throw numerical_error("RealDft: FFTW planning failed");
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    check(in.size(), out.size());
    // r2c does not modify its input.
    fftw_execute_dft_r2c(fwd_.get(), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Destroys `in`.
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const {
    check(out.size(), in.size());
    fftw_execute_dft_c2r(inv_.get(), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

  std::vector<std::complex<double>> forward(std::span<const double> in) const {
    std::vector<std::complex<double>> out(spectrum_size());
    forward(in, out);
    return out;
  }

 private:
  void check(std::size_t real_len, std::size_t complex_len) const {
    if (real_len != n_ || complex_len != spectrum_size()) {
      throw domain_error("RealDft: buffer size mismatch");
    }
  }

  std::size_t n_;
  detail::PlanPtr fwd_;
  detail::PlanPtr inv_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace fracspec

#endif  // FRACSPEC_FFT_HPP
