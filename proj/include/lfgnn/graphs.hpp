#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lfgnn/causality.hpp"
#include "lfgnn/numerics.hpp"

namespace lfgnn {

// Partition of channels into named regions. File format: one
// `channel_label,region_name` per line, '#' comments allowed. Region order is
// first appearance; the canonical channel ordering groups regions
// contiguously in that order, preserving file order within a region.
struct RegionMap {
    std::vector<std::string> regions;            // region names, appearance order
    std::vector<std::string> channels;           // channel labels, file order
    std::vector<std::size_t> channel_region;     // parallel to channels

    static RegionMap parse(const std::string& text);
    static RegionMap load(const std::string& path);

    std::size_t channel_count() const { return channels.size(); }
    std::size_t region_count() const { return regions.size(); }

    // Indices into `channels` grouped by region.
    std::vector<std::size_t> canonical_order() const;

    // Per-region [begin, end) extents in the canonical ordering.
    std::vector<std::pair<std::size_t, std::size_t>> extents() const;

    // Channel labels in canonical order.
    std::vector<std::string> canonical_labels() const;
    // Region index of each canonically ordered channel.
    std::vector<std::size_t> canonical_channel_region() const;

    // Permutation mapping this map's canonical slots to the channels of `ts`:
    // result[k] is the index in ts of the k-th canonical channel. Matches by
    // label when ts has labels (the sets must coincide), by position
    // otherwise.
    std::vector<std::size_t> order_for(const TimeSeriesSet& ts) const;
    // Same permutation from bare labels; empty means positional.
    std::vector<std::size_t> order_for(const std::vector<std::string>& labels) const;
};

enum class GraphKind { global, local };

struct CausalGraph {
    std::vector<std::string> labels;
    std::vector<std::string> node_region; // empty for global graphs
    Matrix adjacency;                     // A(i, j) = strength of edge i -> j, >= 0, diagonal 0
    Matrix p_values;                      // 1.0 where no test was run
    GraphKind kind = GraphKind::global;
    std::vector<std::string> warnings;
};

// A_ij = |tau_{i->j}| where p_{i->j} < alpha, else 0.
CausalGraph build_global_adjacency(const FlowDecomposition& f, double alpha,
                                   std::vector<std::string> labels = {});

// Channels are reordered canonically; flow is estimated per region in
// isolation, so the assembled adjacency is block-diagonal by construction.
// Every region uses cfg verbatim, which makes each block bit-equal to
// build_global_adjacency run on that region's channels alone.
// Single-channel regions contribute a zero block and a warning.
CausalGraph build_local_adjacency(const TimeSeriesSet& x, const RegionMap& map,
                                  const SignificanceConfig& cfg);

// P_fwd = D_out^{-1} A, P_bwd = D_in^{-1} A^T. Zero-degree rows stay zero.
struct Transitions {
    Matrix forward;
    Matrix backward;
};
Transitions degree_transitions(const CausalGraph& g);
Transitions degree_transitions(const Matrix& adjacency);

// Keep the k largest-magnitude incoming entries per target column, zero the
// rest. Ties keep the smaller source index.
Matrix topk_sparsify(const Matrix& a, std::size_t k);

enum class GraphFormat { json, dot, csv };

void export_graph(const CausalGraph& g, GraphFormat format, const std::string& path);
// JSON only; adjacency, labels, regions, and kind round-trip exactly.
// p-values of absent edges load as 1.
CausalGraph load_graph(const std::string& path);

} // namespace lfgnn
