#ifndef GLFA_INTERACTION_GRAPH_HPP
#define GLFA_INTERACTION_GRAPH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "glfa/sparse_matrix.hpp"

namespace glfa {

// Two edge weights count as equal within this absolute tolerance. Ratings are
// effectively discrete, so this is exact comparison for integer-valued data.
inline constexpr double kWeightTolerance = 1e-9;

inline bool weights_equal(double a, double b) {
    return a <= b ? b - a <= kWeightTolerance : a - b <= kWeightTolerance;
}

struct WeightedArc {
    std::int32_t to;
    double weight;
};

/// Bipartite weighted view of a training matrix: one adjacency list per user
/// and per item, each holding the observed ratings as edge weights. Immutable
/// after construction.
class InteractionGraph {
  public:
    explicit InteractionGraph(const SparseMatrix& train);

    std::int32_t n_users() const { return n_users_; }
    std::int32_t n_items() const { return n_items_; }
    std::size_t n_edges() const { return n_edges_; }

    std::span<const WeightedArc> user_arcs(std::int32_t u) const;  // sorted by item id
    std::span<const WeightedArc> item_arcs(std::int32_t i) const;  // sorted by user id

    bool has_edge(std::int32_t u, std::int32_t i) const;

  private:
    std::int32_t n_users_;
    std::int32_t n_items_;
    std::size_t n_edges_;
    std::vector<std::uint32_t> u_ptr_, i_ptr_;
    std::vector<WeightedArc> u_arcs_, i_arcs_;
};

InteractionGraph build_graph(const SparseMatrix& train);

enum class Confidence { High, Low };

struct HoiRecord {
    std::int32_t u;
    std::int32_t i;
    std::int32_t order;
    Confidence confidence;

    friend bool operator==(const HoiRecord&, const HoiRecord&) = default;
};

/// High-confidence indirect pairs, unique and sorted by (u, i).
class HoiSet {
  public:
    HoiSet() = default;
    explicit HoiSet(std::vector<HoiRecord> records);

    std::span<const HoiRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

  private:
    std::vector<HoiRecord> records_;
};

// Interaction order of an unobserved pair: p such that the shortest
// alternating path from u to i has 2p-1 edges (it passes through p-1 user
// vertices). Returns nullopt when i is unreachable from u. Throws if (u, i)
// is a direct edge.
std::optional<std::int32_t> hoi_order(const InteractionGraph& g, std::int32_t u, std::int32_t i);

// Label a pair of known order p by examining every simple path of exactly
// 2p-1 edges from u to i: Low as soon as one such path routes through an
// intermediate item whose two path edges carry different weights, High when
// all paths are weight-balanced. Throws unless p == hoi_order(g, u, i).
Confidence classify_confidence(const InteractionGraph& g, std::int32_t u, std::int32_t i,
                               std::int32_t order);

struct HoiStats {
    std::map<std::int32_t, std::size_t> high_per_order;
    std::map<std::int32_t, std::size_t> low_per_order;
    std::size_t n_high = 0;
    std::size_t n_low = 0;
    std::size_t n_unreachable = 0;
    std::size_t n_beyond_cap = 0;  // reachable pairs whose order exceeds the cap
};

// All high-confidence pairs of order <= max_order, sorted by (u, i).
// Discovery fans out across users; n_threads = 0 picks a default capped by
// the GLFA_THREADS environment variable. Results are merged in user order,
// so the output does not depend on the thread count.
HoiSet high_confidence_set(const InteractionGraph& g, std::int32_t max_order,
                           HoiStats* stats = nullptr, int n_threads = 0);

}  // namespace glfa

#endif
