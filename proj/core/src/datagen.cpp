#include "dwarfproxy/datagen.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "binary_io.hpp"
#include "dwarfproxy/error.hpp"
#include "dwarfproxy/parallel.hpp"
#include "dwarfproxy/random.hpp"

namespace dwarfproxy {

namespace {

constexpr std::uint64_t kGenChunk = 1 << 16;
constexpr std::array<char, 8> kMagic = {'D', 'W', 'P', 'X', 'D', 'A', 'T', '1'};

// R-MAT quadrant probabilities (a, b, c; d is the remainder).
constexpr double kRmatA = 0.57;
constexpr double kRmatB = 0.19;
constexpr double kRmatC = 0.19;

double draw_value(SplitMix64& rng, const DataSpec& spec) {
  const double lo = spec.value_range.lo;
  const double hi = spec.value_range.hi;
  for (;;) {
    double v;
    if (spec.distribution == ValueDistribution::Uniform) {
      v = lo + (hi - lo) * rng.next_unit();
    } else {
      // Box-Muller, clamped to the range; mean at the centre, 3 sigma to each bound.
      const double u1 = 1.0 - rng.next_unit();
      const double u2 = rng.next_unit();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      v = std::clamp(0.5 * (lo + hi) + z * (hi - lo) / 6.0, lo, hi);
    }
    if (v != 0.0) return v;
    if (lo == hi) return lo;  // unreachable after validate(); guards the loop
  }
}

Dataset generate_numeric(const DataSpec& spec) {
  NumericData data;
  data.dim = spec.dim;
  data.values.resize(spec.size);
  const auto chunks = make_chunks(spec.size, kGenChunk);
  parallel_for(chunks.size(), host_parallelism(), [&](std::uint64_t c) {
    SplitMix64 rng(split_seed(spec.seed, c));
    for (std::uint64_t i = chunks[c].begin; i < chunks[c].end; ++i) {
      const bool zero = rng.next_unit() < spec.sparsity;
      data.values[i] = zero ? 0.0 : draw_value(rng, spec);
    }
  });
  return Dataset{spec, std::move(data)};
}

GraphEdge draw_uniform_edge(SplitMix64& rng, std::uint32_t vertices) {
  for (;;) {
    const auto s = static_cast<std::uint32_t>(rng.next_below(vertices));
    const auto d = static_cast<std::uint32_t>(rng.next_below(vertices));
    if (s != d) return {s, d};
  }
}

GraphEdge draw_rmat_edge(SplitMix64& rng, std::uint32_t vertices, int scale) {
  for (;;) {
    std::uint64_t s = 0;
    std::uint64_t d = 0;
    for (int level = 0; level < scale; ++level) {
      const double u = rng.next_unit();
      s <<= 1;
      d <<= 1;
      if (u < kRmatA) {
      } else if (u < kRmatA + kRmatB) {
        d |= 1;
      } else if (u < kRmatA + kRmatB + kRmatC) {
        s |= 1;
      } else {
        s |= 1;
        d |= 1;
      }
    }
    if (s < vertices && d < vertices && s != d) {
      return {static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d)};
    }
  }
}

Dataset generate_graph(const DataSpec& spec) {
  GraphData g;
  g.vertices = static_cast<std::uint32_t>(spec.size);
  const std::uint64_t edge_count =
      g.vertices > 1 ? static_cast<std::uint64_t>(std::llround(spec.edge_factor * g.vertices)) : 0;
  g.edges.resize(edge_count);
  const int scale = std::max(1, static_cast<int>(std::bit_width(g.vertices - 1)));
  const auto chunks = make_chunks(edge_count, kGenChunk);
  parallel_for(chunks.size(), host_parallelism(), [&](std::uint64_t c) {
    SplitMix64 rng(split_seed(spec.seed, c));
    for (std::uint64_t i = chunks[c].begin; i < chunks[c].end; ++i) {
      g.edges[i] = spec.graph_model == GraphModel::Uniform
                       ? draw_uniform_edge(rng, g.vertices)
                       : draw_rmat_edge(rng, g.vertices, scale);
    }
  });
  return Dataset{spec, std::move(g)};
}

void fill_payload(std::uint8_t* rec, std::uint32_t width, std::uint64_t index) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::uint32_t pos = kTextKeyBytes;
  // 16 hex digits of the record index, then repeating filler letters.
  for (int shift = 60; shift >= 0 && pos < width; shift -= 4, ++pos) {
    rec[pos] = static_cast<std::uint8_t>(kHex[(index >> shift) & 0xF]);
  }
  for (std::uint32_t j = 0; pos < width; ++pos, ++j) {
    rec[pos] = static_cast<std::uint8_t>('A' + (index + j) % 26);
  }
}

Dataset with_size(Dataset data) {
  data.spec.size = data.element_count();
  return data;
}

}  // namespace

std::string_view to_string(DataKind kind) noexcept {
  switch (kind) {
    case DataKind::Text: return "text";
    case DataKind::Vector: return "vector";
    case DataKind::Matrix: return "matrix";
    case DataKind::Graph: return "graph";
  }
  return "?";
}

std::string_view to_string(ValueDistribution dist) noexcept {
  return dist == ValueDistribution::Uniform ? "uniform" : "normal";
}

std::string_view to_string(GraphModel model) noexcept {
  return model == GraphModel::PowerLaw ? "power_law" : "uniform";
}

DataKind parse_data_kind(std::string_view text) {
  if (text == "text") return DataKind::Text;
  if (text == "vector") return DataKind::Vector;
  if (text == "matrix") return DataKind::Matrix;
  if (text == "graph") return DataKind::Graph;
  throw ValidationError("kind", "unknown data kind '" + std::string(text) +
                                    "' (expected text, vector, matrix, graph)");
}

ValueDistribution parse_distribution(std::string_view text) {
  if (text == "uniform") return ValueDistribution::Uniform;
  if (text == "normal") return ValueDistribution::Normal;
  throw ValidationError("distribution", "unknown distribution '" + std::string(text) +
                                            "' (expected uniform, normal)");
}

GraphModel parse_graph_model(std::string_view text) {
  if (text == "power_law") return GraphModel::PowerLaw;
  if (text == "uniform") return GraphModel::Uniform;
  throw ValidationError("graph_model", "unknown graph model '" + std::string(text) +
                                           "' (expected power_law, uniform)");
}

void DataSpec::validate() const {
  if (size < 1) throw ValidationError("size", "must be at least 1");
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw ValidationError("sparsity", "must lie in [0, 1], got " + std::to_string(sparsity));
  }
  if (!(edge_factor >= 0.0) || !std::isfinite(edge_factor)) {
    throw ValidationError("edge_factor", "must be a finite value >= 0");
  }
  if (dim < 1) throw ValidationError("dim", "must be at least 1");
  if (!std::isfinite(value_range.lo) || !std::isfinite(value_range.hi) ||
      value_range.lo > value_range.hi) {
    throw ValidationError("value_range", "bounds must be finite with lo <= hi");
  }
  switch (kind) {
    case DataKind::Text:
      if (record_bytes < kTextKeyBytes) {
        throw ValidationError("record_bytes", "must be at least 10 to hold the key");
      }
      break;
    case DataKind::Vector:
    case DataKind::Matrix:
      if (sparsity < 1.0 && value_range.lo == 0.0 && value_range.hi == 0.0) {
        throw ValidationError("value_range", "cannot produce non-zero values");
      }
      break;
    case DataKind::Graph:
      if (size > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("size", "graph vertex count exceeds 2^32 - 1");
      }
      break;
  }
}

std::uint64_t Dataset::element_count() const noexcept {
  return std::visit(
      [](const auto& p) -> std::uint64_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextRecords>) return p.count();
        else if constexpr (std::is_same_v<T, NumericData>) return p.values.size();
        else return p.vertices;
      },
      payload);
}

std::uint64_t Dataset::digest() const noexcept {
  const auto bytes_of = [](const auto& vec) {
    return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(vec.data()),
                                         vec.size() * sizeof(vec[0]));
  };
  std::uint64_t h = mix64(static_cast<std::uint64_t>(spec.kind));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextRecords>) {
          h = hash_bytes(p.bytes, h ^ p.record_bytes);
        } else if constexpr (std::is_same_v<T, NumericData>) {
          h = hash_bytes(bytes_of(p.values), h ^ p.dim);
        } else {
          h = hash_bytes(bytes_of(p.edges), h ^ p.vertices);
        }
      },
      payload);
  return h;
}

bool operator==(const Dataset& a, const Dataset& b) noexcept {
  if (a.spec.kind != b.spec.kind || a.payload.index() != b.payload.index()) return false;
  if (const auto* ta = a.text()) {
    const auto* tb = b.text();
    return ta->record_bytes == tb->record_bytes && ta->bytes == tb->bytes;
  }
  if (const auto* na = a.numeric()) {
    const auto* nb = b.numeric();
    return na->dim == nb->dim && na->values.size() == nb->values.size() &&
           (na->values.empty() ||
            std::memcmp(na->values.data(), nb->values.data(),
                        na->values.size() * sizeof(double)) == 0);
  }
  const auto* ga = a.graph();
  const auto* gb = b.graph();
  return ga->vertices == gb->vertices && ga->edges == gb->edges;
}

Dataset text_records(std::uint64_t count, std::uint32_t record_bytes, std::uint64_t seed) {
  DataSpec spec;
  spec.kind = DataKind::Text;
  spec.size = count;
  spec.record_bytes = record_bytes;
  spec.seed = seed;
  spec.validate();

  TextRecords recs;
  recs.record_bytes = record_bytes;
  recs.bytes.resize(count * record_bytes);
  const auto chunks = make_chunks(count, kGenChunk);
  parallel_for(chunks.size(), host_parallelism(), [&](std::uint64_t c) {
    SplitMix64 rng(split_seed(seed, c));
    for (std::uint64_t i = chunks[c].begin; i < chunks[c].end; ++i) {
      std::uint8_t* rec = recs.bytes.data() + i * record_bytes;
      const std::uint64_t k0 = rng();
      const std::uint64_t k1 = rng();
      std::memcpy(rec, &k0, 8);
      std::memcpy(rec + 8, &k1, 2);
      fill_payload(rec, record_bytes, i);
    }
  });
  return Dataset{spec, std::move(recs)};
}

Dataset generate(const DataSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DataKind::Text: {
      Dataset d = text_records(spec.size, spec.record_bytes, spec.seed);
      d.spec = spec;
      return d;
    }
    case DataKind::Vector:
    case DataKind::Matrix:
      return generate_numeric(spec);
    case DataKind::Graph:
      return generate_graph(spec);
  }
  throw ValidationError("kind", "unhandled data kind");
}

double zero_fraction(const Dataset& data) noexcept {
  const auto* n = data.numeric();
  if (!n || n->values.empty()) return 0.0;
  const auto zeros = std::count(n->values.begin(), n->values.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(n->values.size());
}

Dataset slice_cyclic(const Dataset& data, std::uint64_t offset, std::uint64_t count) {
  const std::uint64_t n = data.element_count();
  if (n == 0) throw ValidationError("size", "cannot slice an empty dataset");
  Dataset out;
  out.spec = data.spec;

  if (const auto* t = data.text()) {
    TextRecords r;
    r.record_bytes = t->record_bytes;
    r.bytes.resize(count * t->record_bytes);
    for (std::uint64_t i = 0; i < count;) {
      const std::uint64_t src = (offset + i) % n;
      const std::uint64_t run = std::min(count - i, n - src);
      std::memcpy(r.bytes.data() + i * t->record_bytes, t->bytes.data() + src * t->record_bytes,
                  run * t->record_bytes);
      i += run;
    }
    out.payload = std::move(r);
  } else if (const auto* v = data.numeric()) {
    NumericData r;
    r.dim = v->dim;
    r.values.resize(count);
    for (std::uint64_t i = 0; i < count;) {
      const std::uint64_t src = (offset + i) % n;
      const std::uint64_t run = std::min(count - i, n - src);
      std::copy_n(v->values.begin() + static_cast<std::ptrdiff_t>(src), run,
                  r.values.begin() + static_cast<std::ptrdiff_t>(i));
      i += run;
    }
    out.payload = std::move(r);
  } else {
    const auto& g = *data.graph();
    if (count > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("size", "graph slice exceeds 2^32 - 1 vertices");
    }
    GraphData r;
    r.vertices = static_cast<std::uint32_t>(count);
    const std::uint64_t first_copy = offset / n;
    const std::uint64_t last_copy = (offset + count - 1) / n;
    for (std::uint64_t k = first_copy; k <= last_copy; ++k) {
      const std::int64_t shift = static_cast<std::int64_t>(k * n) - static_cast<std::int64_t>(offset);
      for (const auto& e : g.edges) {
        const std::int64_t s = shift + e.src;
        const std::int64_t d = shift + e.dst;
        if (s >= 0 && d >= 0 && s < static_cast<std::int64_t>(count) &&
            d < static_cast<std::int64_t>(count)) {
          r.edges.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d)});
        }
      }
    }
    out.payload = std::move(r);
  }
  return with_size(std::move(out));
}

Dataset concatenate(std::span<const Dataset> parts) {
  if (parts.empty()) throw ValidationError("parts", "nothing to concatenate");
  if (parts.size() == 1) return parts.front();
  const DataKind kind = parts.front().kind();
  Dataset out;
  out.spec = parts.front().spec;
  for (const auto& p : parts) {
    if (p.payload.index() != parts.front().payload.index()) {
      throw InputKindError("cannot join datasets of kinds " + std::string(to_string(kind)) +
                           " and " + std::string(to_string(p.kind())));
    }
  }
  if (const auto* t0 = parts.front().text()) {
    TextRecords r;
    r.record_bytes = t0->record_bytes;
    for (const auto& p : parts) {
      if (p.text()->record_bytes != r.record_bytes) {
        throw InputKindError("cannot join text datasets with different record widths");
      }
      r.bytes.insert(r.bytes.end(), p.text()->bytes.begin(), p.text()->bytes.end());
    }
    out.payload = std::move(r);
  } else if (const auto* n0 = parts.front().numeric()) {
    NumericData r;
    r.dim = n0->dim;
    for (const auto& p : parts) {
      if (p.numeric()->dim != r.dim) {
        throw InputKindError("cannot join numeric datasets with different dims");
      }
      r.values.insert(r.values.end(), p.numeric()->values.begin(), p.numeric()->values.end());
    }
    out.payload = std::move(r);
  } else {
    GraphData r;
    std::uint64_t base = 0;
    for (const auto& p : parts) {
      const auto& g = *p.graph();
      for (const auto& e : g.edges) {
        r.edges.push_back({static_cast<std::uint32_t>(e.src + base),
                           static_cast<std::uint32_t>(e.dst + base)});
      }
      base += g.vertices;
    }
    if (base > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("size", "joined graph exceeds 2^32 - 1 vertices");
    }
    r.vertices = static_cast<std::uint32_t>(base);
    out.payload = std::move(r);
  }
  return with_size(std::move(out));
}

void write_dataset(std::ostream& out, const Dataset& data) {
  using detail::put;
  const DataSpec& s = data.spec;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.kind));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.distribution));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.graph_model));
  put<std::uint8_t>(out, 0);
  put(out, s.size);
  put(out, s.sparsity);
  put(out, s.edge_factor);
  put(out, s.seed);
  put(out, s.value_range.lo);
  put(out, s.value_range.hi);
  put(out, s.record_bytes);
  put(out, s.dim);

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextRecords>) {
          put(out, p.record_bytes);
          put<std::uint64_t>(out, p.count());
          detail::put_span<std::uint8_t>(out, p.bytes);
        } else if constexpr (std::is_same_v<T, NumericData>) {
          put(out, p.dim);
          put<std::uint64_t>(out, p.values.size());
          detail::put_span<double>(out, p.values);
        } else {
          put<std::uint64_t>(out, p.vertices);
          put<std::uint64_t>(out, p.edges.size());
          detail::put_span<GraphEdge>(out, p.edges);
        }
      },
      data.payload);
  if (!out) throw IoError("failed writing dataset container");
}

Dataset read_dataset(std::istream& in) {
  using detail::get;
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError(0, "not a dataset container (bad magic)");
  }
  DataSpec s;
  const auto kind = get<std::uint8_t>(in);
  const auto dist = get<std::uint8_t>(in);
  const auto model = get<std::uint8_t>(in);
  get<std::uint8_t>(in);
  if (kind > 3 || dist > 1 || model > 1) throw ParseError(0, "corrupt container header");
  s.kind = static_cast<DataKind>(kind);
  s.distribution = static_cast<ValueDistribution>(dist);
  s.graph_model = static_cast<GraphModel>(model);
  s.size = get<std::uint64_t>(in);
  s.sparsity = get<double>(in);
  s.edge_factor = get<double>(in);
  s.seed = get<std::uint64_t>(in);
  s.value_range.lo = get<double>(in);
  s.value_range.hi = get<double>(in);
  s.record_bytes = get<std::uint32_t>(in);
  s.dim = get<std::uint32_t>(in);

  Dataset d;
  d.spec = s;
  switch (s.kind) {
    case DataKind::Text: {
      TextRecords r;
      r.record_bytes = get<std::uint32_t>(in);
      const auto count = get<std::uint64_t>(in);
      r.bytes = detail::get_vector<std::uint8_t>(in, count * r.record_bytes);
      d.payload = std::move(r);
      break;
    }
    case DataKind::Vector:
    case DataKind::Matrix: {
      NumericData r;
      r.dim = get<std::uint32_t>(in);
      const auto count = get<std::uint64_t>(in);
      r.values = detail::get_vector<double>(in, count);
      d.payload = std::move(r);
      break;
    }
    case DataKind::Graph: {
      GraphData r;
      r.vertices = static_cast<std::uint32_t>(get<std::uint64_t>(in));
      const auto count = get<std::uint64_t>(in);
      r.edges = detail::get_vector<GraphEdge>(in, count);
      d.payload = std::move(r);
      break;
    }
  }
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_dataset(out, data);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace dwarfproxy
