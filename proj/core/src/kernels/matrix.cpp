#include <cmath>

#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

// Dense row-major view over the consumed prefix; cells past `count` read as 0.
struct RowView {
  const double* values;
  std::uint64_t count;
  std::uint32_t dim;

  std::uint64_t rows() const noexcept { return (count + dim - 1) / dim; }
  double at(std::uint64_t r, std::uint32_t c) const noexcept {
    const std::uint64_t i = r * dim + c;
    return i < count ? values[i] : 0.0;
  }
};

struct DenseMatrix {
  std::uint64_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> cells;
  double at(std::uint64_t r, std::uint32_t c) const noexcept { return cells[r * cols + c]; }
};

DenseMatrix operand_b(const RowView& a, const Dataset* b) {
  DenseMatrix m;
  m.rows = a.dim;
  if (b) {
    const auto* nb = b->numeric();
    m.cols = nb->dim;
    if (nb->values.size() < static_cast<std::uint64_t>(a.dim) * nb->dim) {
      throw ValidationError("b", "second operand needs " + std::to_string(a.dim) + " rows of " +
                                     std::to_string(nb->dim) + " values");
    }
    m.cells.assign(nb->values.begin(),
                   nb->values.begin() + static_cast<std::ptrdiff_t>(a.dim) * nb->dim);
    return m;
  }
  // Leading dim x dim block of A; rows missing from A become identity rows.
  m.cols = a.dim;
  m.cells.assign(static_cast<std::size_t>(a.dim) * a.dim, 0.0);
  for (std::uint32_t r = 0; r < a.dim; ++r) {
    if (r < a.rows()) {
      for (std::uint32_t c = 0; c < a.dim; ++c) m.cells[r * a.dim + c] = a.at(r, c);
    } else {
      m.cells[r * a.dim + r] = 1.0;
    }
  }
  return m;
}

DenseMatrix centroids_of(const RowView& a, const Dataset* b, std::uint32_t wanted) {
  DenseMatrix m;
  m.cols = a.dim;
  if (b) {
    const auto* nb = b->numeric();
    if (nb->dim != a.dim) {
      throw ValidationError("b", "centroid dim " + std::to_string(nb->dim) +
                                     " differs from input dim " + std::to_string(a.dim));
    }
    RowView bv{nb->values.data(), nb->values.size(), nb->dim};
    m.rows = bv.rows();
    m.cells.resize(m.rows * m.cols);
    for (std::uint64_t r = 0; r < m.rows; ++r) {
      for (std::uint32_t c = 0; c < m.cols; ++c) m.cells[r * m.cols + c] = bv.at(r, c);
    }
    return m;
  }
  m.rows = std::min<std::uint64_t>(wanted, a.rows());
  m.cells.resize(m.rows * m.cols);
  for (std::uint64_t r = 0; r < m.rows; ++r) {
    for (std::uint32_t c = 0; c < m.cols; ++c) m.cells[r * m.cols + c] = a.at(r, c);
  }
  return m;
}

}  // namespace

KernelResult run_matrix(const Dataset& a, const Dataset* b, MatrixVariant variant,
                        const KernelParams& params, const KernelContext& ctx) {
  detail::check_input("matrix", a, params, {DataKind::Matrix, DataKind::Vector});
  if (b && !b->numeric()) {
    throw InputKindError("matrix expects a vector|matrix second operand, got " +
                         std::string(to_string(b->kind())));
  }
  detail::Stopwatch watch;
  const auto& na = *a.numeric();
  const RowView view{na.values.data(), params.input_data_size, na.dim};
  const std::uint32_t dim = na.dim;
  const auto chunks = detail::row_chunks(params.input_data_size, dim, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  ChunkStore<double> store(chunks.size(), ctx);

  std::uint32_t out_dim = dim;
  DenseMatrix rhs;
  if (variant == MatrixVariant::Multiply) {
    rhs = operand_b(view, b);
    out_dim = rhs.cols;
  } else if (variant == MatrixVariant::EuclideanDistance ||
             variant == MatrixVariant::CosineDistance) {
    rhs = centroids_of(view, b, ctx.options.centroids);
    out_dim = static_cast<std::uint32_t>(rhs.rows);
  }
  std::vector<double> centroid_norms;
  if (variant == MatrixVariant::CosineDistance) {
    for (std::uint64_t k = 0; k < rhs.rows; ++k) {
      double s = 0.0;
      for (std::uint32_t c = 0; c < dim; ++c) s += rhs.at(k, c) * rhs.at(k, c);
      centroid_norms.push_back(std::sqrt(s));
    }
  }

  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t ci) {
    const auto range = chunks[ci];
    const std::uint64_t r0 = range.begin / dim;
    const std::uint64_t r1 = (range.end + dim - 1) / dim;
    std::vector<double> out;
    auto& ops = tallies.ops[ci];
    switch (variant) {
      case MatrixVariant::Construct: {
        out.reserve(range.size());
        for (std::uint64_t r = r0; r < r1; ++r) {
          const std::uint64_t b0 = r * dim;
          const std::uint64_t b1 = std::min<std::uint64_t>(b0 + dim, range.end);
          double norm = 0.0;
          for (auto i = b0; i < b1; ++i) norm += std::fabs(view.values[i]);
          for (auto i = b0; i < b1; ++i) out.push_back(norm > 0.0 ? view.values[i] / norm : 0.0);
          ops.float_ops += 3 * (b1 - b0);
          ops.loads += 2 * (b1 - b0);
          ops.stores += b1 - b0;
          ops.branches += 1 + (b1 - b0);
        }
        break;
      }
      case MatrixVariant::Multiply: {
        out.assign((r1 - r0) * out_dim, 0.0);
        for (std::uint64_t r = r0; r < r1; ++r) {
          double* row = out.data() + (r - r0) * out_dim;
          for (std::uint32_t k = 0; k < dim; ++k) {
            const double x = view.at(r, k);
            const double* brow = rhs.cells.data() + static_cast<std::size_t>(k) * out_dim;
            for (std::uint32_t j = 0; j < out_dim; ++j) row[j] += x * brow[j];
          }
        }
        const std::uint64_t macs = (r1 - r0) * dim * out_dim;
        ops.float_ops += 2 * macs;
        ops.loads += 2 * macs + (r1 - r0) * dim;
        ops.stores += macs;
        ops.branches += (r1 - r0) * dim;
        break;
      }
      case MatrixVariant::EuclideanDistance:
      case MatrixVariant::CosineDistance: {
        const bool cosine = variant == MatrixVariant::CosineDistance;
        out.reserve((r1 - r0) * out_dim);
        for (std::uint64_t r = r0; r < r1; ++r) {
          double row_norm = 0.0;
          if (cosine) {
            for (std::uint32_t c = 0; c < dim; ++c) row_norm += view.at(r, c) * view.at(r, c);
            row_norm = std::sqrt(row_norm);
          }
          for (std::uint64_t k = 0; k < rhs.rows; ++k) {
            double acc = 0.0;
            for (std::uint32_t c = 0; c < dim; ++c) {
              const double x = view.at(r, c);
              const double y = rhs.at(k, c);
              acc += cosine ? x * y : (x - y) * (x - y);
            }
            if (cosine) {
              const double denom = row_norm * centroid_norms[k];
              out.push_back(denom > 0.0 ? 1.0 - acc / denom : 1.0);
            } else {
              out.push_back(std::sqrt(acc));
            }
          }
        }
        const std::uint64_t cells = (r1 - r0) * rhs.rows * dim;
        ops.float_ops += 3 * cells + (r1 - r0) * rhs.rows * 2;
        ops.loads += 2 * cells;
        ops.stores += (r1 - r0) * rhs.rows;
        ops.branches += cells / 4 + (r1 - r0) * rhs.rows;
        break;
      }
    }
    tallies.work[ci] = range.size();
    store.put(ci, std::move(out));
  });

  std::vector<double> out;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    auto part = store.take(c);
    out.insert(out.end(), part.begin(), part.end());
  }
  KernelResult result;
  result.output = detail::make_numeric(a, DataKind::Matrix, out_dim, std::move(out));
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();
  detail::finish_report(result.report, std::move(tallies), watch, params);
  return result;
}

}  // namespace dwarfproxy
