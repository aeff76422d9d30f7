#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using cplx = std::complex<double>;
using detail::ChunkStore;
using detail::ChunkTallies;

// In-place iterative radix-2 Cooley-Tukey. a.size() must be a power of two.
// Forward uses exp(-2 pi i k n / N); inverse uses the conjugate and scales by 1/N.
void fft_inplace(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<cplx> tw(n / 2);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    tw[k] = {std::cos(angle), std::sin(angle)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k * step];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
  }
}

// Unnormalized DCT-II, X_k = sum_n x_n cos(pi (2n + 1) k / 2N), through one
// complex FFT of the even/odd reordered input.
std::vector<double> dct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 1) return x;
  std::vector<cplx> v(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    v[k] = x[2 * k];
    v[n - 1 - k] = x[2 * k + 1];
  }
  fft_inplace(v, false);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = -std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    out[k] = (v[k] * cplx(std::cos(angle), std::sin(angle))).real();
  }
  return out;
}

}  // namespace

KernelResult run_transform(const Dataset& data, TransformVariant variant,
                           const KernelParams& params, const KernelContext& ctx) {
  detail::check_input("transform", data, params, {DataKind::Vector, DataKind::Matrix});
  detail::Stopwatch watch;
  const auto& nd = *data.numeric();
  const bool complex_in = nd.dim == 2;
  const std::uint32_t stride = complex_in ? 2 : 1;
  const auto chunks = detail::row_chunks(params.input_data_size, stride, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  ChunkStore<double> store(chunks.size(), ctx);
  std::vector<std::uint64_t> pads(chunks.size(), 0);

  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
    const auto range = chunks[c];
    const std::uint64_t samples = (range.size() + stride - 1) / stride;
    const std::uint64_t n = std::bit_ceil(samples);
    pads[c] = n - samples;
    const std::uint64_t log_n = std::max<std::uint64_t>(1, std::bit_width(n) - 1);
    std::vector<double> out;
    if (variant == TransformVariant::Dct) {
      std::vector<double> x(n, 0.0);
      for (std::uint64_t s = 0; s < samples; ++s) x[s] = nd.values[range.begin + s * stride];
      out = dct2(x);
    } else {
      std::vector<cplx> x(n);
      for (std::uint64_t s = 0; s < samples; ++s) {
        const std::uint64_t i = range.begin + s * stride;
        const double im = complex_in && i + 1 < range.end ? nd.values[i + 1] : 0.0;
        x[s] = {nd.values[i], im};
      }
      fft_inplace(x, variant == TransformVariant::Ifft);
      out.resize(2 * n);
      for (std::uint64_t s = 0; s < n; ++s) {
        out[2 * s] = x[s].real();
        out[2 * s + 1] = x[s].imag();
      }
    }
    auto& ops = tallies.ops[c];
    ops.float_ops += 5 * n * log_n + 4 * n;
    ops.loads += 2 * n * log_n + n;
    ops.stores += 2 * n * log_n + out.size();
    ops.integer_ops += 2 * n;
    ops.branches += n * log_n / 2 + n;
    tallies.work[c] = range.size();
    store.put(c, std::move(out));
  });

  std::vector<double> out;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    auto part = store.take(c);
    out.insert(out.end(), part.begin(), part.end());
  }
  const std::uint32_t out_dim = variant == TransformVariant::Dct ? 1 : 2;
  KernelResult result;
  result.output = detail::make_numeric(data, DataKind::Vector, out_dim, std::move(out));
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();
  for (auto p : pads) result.report.pad_count += p;
  detail::finish_report(result.report, std::move(tallies), watch, params);
  return result;
}

}  // namespace dwarfproxy
