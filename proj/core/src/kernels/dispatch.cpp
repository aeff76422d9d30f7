#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

template <typename Enum, std::size_t N>
Enum pick(std::string_view variant, Dwarf dwarf, const Enum (&values)[N]) {
  const auto names = variants_of(dwarf);
  for (std::size_t i = 0; i < N && i < names.size(); ++i) {
    if (names[i] == variant) return values[i];
  }
  throw ValidationError("variant", "'" + std::string(variant) + "' is not a " +
                                       std::string(to_string(dwarf)) + " variant");
}

}  // namespace

KernelResult run_kernel(const KernelInvocation& inv, const Dataset& a, const Dataset* b,
                        std::uint64_t seed) {
  return run_kernel(inv, a, b, seed, default_spill_root());
}

KernelResult run_kernel(const KernelInvocation& inv, const Dataset& a, const Dataset* b,
                        std::uint64_t seed, const std::filesystem::path& spill_root) {
  inv.validate();
  KernelContext ctx;
  ctx.spill_root = spill_root;
  ctx.spill_intermediate = inv.spill_intermediate;
  ctx.seed = seed;
  ctx.options = inv.options;
  const auto& p = inv.params;
  const auto& v = inv.variant;

  switch (inv.dwarf) {
    case Dwarf::Sort: {
      static constexpr SortVariant kV[] = {SortVariant::Quick, SortVariant::Merge};
      return run_sort(a, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::Sampling: {
      static constexpr SamplingVariant kV[] = {SamplingVariant::Random, SamplingVariant::Interval};
      return run_sampling(a, pick(v, inv.dwarf, kV), inv.options.fraction, p, ctx);
    }
    case Dwarf::Graph: {
      static constexpr GraphVariant kV[] = {GraphVariant::Construct, GraphVariant::Bfs,
                                            GraphVariant::ConnectedComponents,
                                            GraphVariant::DegreeCount};
      return run_graph(a, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::Matrix: {
      static constexpr MatrixVariant kV[] = {MatrixVariant::Construct, MatrixVariant::Multiply,
                                             MatrixVariant::EuclideanDistance,
                                             MatrixVariant::CosineDistance};
      return run_matrix(a, b, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::Transform: {
      static constexpr TransformVariant kV[] = {TransformVariant::Fft, TransformVariant::Ifft,
                                                TransformVariant::Dct};
      return run_transform(a, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::Set: {
      static constexpr SetVariant kV[] = {SetVariant::Union, SetVariant::Intersection,
                                          SetVariant::Difference, SetVariant::Jaccard};
      if (!b) throw ValidationError("b", "set kernels need a second operand");
      return run_set(a, *b, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::Logic: {
      static constexpr LogicVariant kV[] = {LogicVariant::Hash, LogicVariant::XorCipher,
                                            LogicVariant::MinhashSignature};
      return run_logic(a, pick(v, inv.dwarf, kV), p, ctx);
    }
    case Dwarf::BasicStatistic: {
      static constexpr StatisticVariant kV[] = {StatisticVariant::Count, StatisticVariant::Average,
                                                StatisticVariant::MinMax,
                                                StatisticVariant::HistogramProbability};
      return run_statistic(a, pick(v, inv.dwarf, kV), p, ctx);
    }
  }
  throw ValidationError("dwarf", "unhandled dwarf");
}

}  // namespace dwarfproxy
