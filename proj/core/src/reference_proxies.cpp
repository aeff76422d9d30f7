#include <array>

#include "dwarfproxy/proxydag.hpp"

namespace dwarfproxy {

namespace {

// Mirrors proxies/*.proxy.
constexpr std::string_view kTerasort = R"proxy(# Proxy TeraSort: I/O-intensive text sort.
# Weights follow the measured hotspot ratios: sort 70%, sampling 10%, graph 20%.
proxy terasort
budget 1000000
node records source kind=text size=auto seed=11 record_bytes=100
node partitions source kind=graph size=auto seed=12 edge_factor=4 graph=power_law
node sorted sink
node splits sink
node routes sink
edge records sorted sort quick weight=0.7 chunk=16384 par=4 spill
edge records splits sampling random weight=0.1 chunk=16384 par=4 fraction=0.1
edge partitions routes graph bfs weight=0.2 chunk=16384 par=4
)proxy";

constexpr std::string_view kKmeans = R"proxy(# Proxy Kmeans: CPU-intensive clustering over sparse vectors.
# No per-component execution ratios are published for this workload, so the
# initial weights are uniform.
proxy kmeans
budget 1000000
node vectors source kind=vector size=auto seed=21 sparsity=0.9 min=0 max=1 dist=uniform dim=16
node distances intermediate
node clusters sink
node similarity sink
node ordered sink
node centroids sink
edge vectors distances matrix euclidean_distance weight=0.2 chunk=16384 par=4
edge distances clusters statistic count weight=0.2 chunk=16384 par=4
edge vectors similarity matrix cosine_distance weight=0.2 chunk=16384 par=4
edge vectors ordered sort quick weight=0.2 chunk=16384 par=4 spill
edge vectors centroids statistic average weight=0.2 chunk=16384 par=4
)proxy";

constexpr std::string_view kPagerank = R"proxy(# Proxy PageRank: hybrid graph ranking.
# No per-component execution ratios are published for this workload, so the
# initial weights are uniform.
proxy pagerank
budget 1000000
node web source kind=graph size=auto seed=31 edge_factor=8 graph=power_law
node links source kind=matrix size=auto seed=32 sparsity=0.9 min=0 max=1 dist=uniform dim=32
node degrees intermediate
node transition intermediate
node ranked sink
node extremes sink
node scores sink
edge web degrees graph degree_count weight=0.2 chunk=16384 par=4
edge degrees ranked sort quick weight=0.2 chunk=16384 par=4 spill
edge degrees extremes statistic min_max weight=0.2 chunk=16384 par=4
edge links transition matrix construct weight=0.2 chunk=16384 par=4
edge transition scores matrix multiply weight=0.2 chunk=16384 par=4
)proxy";

constexpr std::string_view kSift = R"proxy(# Proxy SIFT: CPU- and memory-intensive feature extraction over synthetic
# pixel matrices.
# No per-component execution ratios are published for this workload, so the
# initial weights are uniform.
proxy sift
budget 1000000
node pixels source kind=matrix size=auto seed=41 sparsity=0 min=0 max=255 dist=normal dim=64
node normalized intermediate
node features intermediate
node spectrum intermediate
node keypoints intermediate
node restored sink
node ranked sink
node extremes sink
node votes sink
edge pixels normalized matrix construct weight=0.125 chunk=16384 par=4
edge normalized features matrix multiply weight=0.125 chunk=16384 par=4
edge pixels spectrum transform fft weight=0.125 chunk=16384 par=4
edge spectrum restored transform ifft weight=0.125 chunk=16384 par=4
edge pixels keypoints sampling interval weight=0.125 chunk=16384 par=4 fraction=0.25
edge keypoints ranked sort quick weight=0.125 chunk=16384 par=4 spill
edge features extremes statistic min_max weight=0.125 chunk=16384 par=4
edge features votes statistic count weight=0.125 chunk=16384 par=4
)proxy";

constexpr std::array<std::string_view, 4> kNames = {"terasort", "kmeans", "pagerank", "sift"};
constexpr std::array<std::string_view, 4> kDocuments = {kTerasort, kKmeans, kPagerank, kSift};

}  // namespace

std::span<const std::string_view> reference_names() noexcept { return kNames; }

std::string_view reference_document(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kDocuments[i];
  }
  throw LookupError("unknown reference proxy '" + std::string(name) +
                    "' (valid: terasort, kmeans, pagerank, sift)");
}

ProxyDag load_reference(std::string_view name) { return parse_proxy(reference_document(name)); }

}  // namespace dwarfproxy
