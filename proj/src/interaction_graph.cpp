#include "glfa/interaction_graph.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace glfa {

InteractionGraph::InteractionGraph(const SparseMatrix& train)
    : n_users_(train.n_rows()), n_items_(train.n_cols()), n_edges_(train.nnz()) {
    u_ptr_.assign(static_cast<std::size_t>(n_users_) + 1, 0);
    i_ptr_.assign(static_cast<std::size_t>(n_items_) + 1, 0);
    for (const Entry& e : train.entries()) {
        ++u_ptr_[static_cast<std::size_t>(e.row) + 1];
        ++i_ptr_[static_cast<std::size_t>(e.col) + 1];
    }
    std::partial_sum(u_ptr_.begin(), u_ptr_.end(), u_ptr_.begin());
    std::partial_sum(i_ptr_.begin(), i_ptr_.end(), i_ptr_.begin());

    u_arcs_.resize(n_edges_);
    i_arcs_.resize(n_edges_);
    std::vector<std::uint32_t> ufill(u_ptr_.begin(), u_ptr_.end() - 1);
    std::vector<std::uint32_t> ifill(i_ptr_.begin(), i_ptr_.end() - 1);
    for (const Entry& e : train.entries()) {
        u_arcs_[ufill[e.row]++] = {e.col, e.value};
        i_arcs_[ifill[e.col]++] = {e.row, e.value};
    }
    auto by_to = [](const WeightedArc& a, const WeightedArc& b) { return a.to < b.to; };
    for (std::int32_t u = 0; u < n_users_; ++u)
        std::sort(u_arcs_.begin() + u_ptr_[u], u_arcs_.begin() + u_ptr_[u + 1], by_to);
    for (std::int32_t i = 0; i < n_items_; ++i)
        std::sort(i_arcs_.begin() + i_ptr_[i], i_arcs_.begin() + i_ptr_[i + 1], by_to);
}

std::span<const WeightedArc> InteractionGraph::user_arcs(std::int32_t u) const {
    if (u < 0 || u >= n_users_) throw std::out_of_range("user id out of range");
    return std::span(u_arcs_).subspan(u_ptr_[u], u_ptr_[u + 1] - u_ptr_[u]);
}

std::span<const WeightedArc> InteractionGraph::item_arcs(std::int32_t i) const {
    if (i < 0 || i >= n_items_) throw std::out_of_range("item id out of range");
    return std::span(i_arcs_).subspan(i_ptr_[i], i_ptr_[i + 1] - i_ptr_[i]);
}

bool InteractionGraph::has_edge(std::int32_t u, std::int32_t i) const {
    auto arcs = user_arcs(u);
    auto it = std::lower_bound(arcs.begin(), arcs.end(), i,
                               [](const WeightedArc& a, std::int32_t id) { return a.to < id; });
    return it != arcs.end() && it->to == i;
}

InteractionGraph build_graph(const SparseMatrix& train) {
    if (train.empty()) throw std::invalid_argument("cannot build a graph from an empty matrix");
    return InteractionGraph(train);
}

HoiSet::HoiSet(std::vector<HoiRecord> records) : records_(std::move(records)) {
    auto key = [](const HoiRecord& r) { return std::pair(r.u, r.i); };
    std::sort(records_.begin(), records_.end(),
              [&](const HoiRecord& a, const HoiRecord& b) { return key(a) < key(b); });
    for (std::size_t k = 1; k < records_.size(); ++k)
        if (key(records_[k]) == key(records_[k - 1]))
            throw std::invalid_argument("duplicate pair in HOI set");
    for (const HoiRecord& r : records_)
        if (r.confidence != Confidence::High)
            throw std::invalid_argument("HOI set holds high-confidence records only");
}

namespace {

// Breadth-first distances from user u over the bipartite structure. Items end
// up at odd distances, users at even ones; -1 marks unreachable.
void bfs_from_user(const InteractionGraph& g, std::int32_t u, std::vector<std::int32_t>& dist_u,
                   std::vector<std::int32_t>& dist_i) {
    dist_u.assign(g.n_users(), -1);
    dist_i.assign(g.n_items(), -1);
    std::vector<std::int32_t> frontier_users{u}, next_users;
    dist_u[u] = 0;
    std::int32_t d = 0;
    while (!frontier_users.empty()) {
        std::vector<std::int32_t> frontier_items;
        for (std::int32_t cu : frontier_users)
            for (const WeightedArc& a : g.user_arcs(cu))
                if (dist_i[a.to] < 0) {
                    dist_i[a.to] = d + 1;
                    frontier_items.push_back(a.to);
                }
        next_users.clear();
        for (std::int32_t ci : frontier_items)
            for (const WeightedArc& a : g.item_arcs(ci))
                if (dist_u[a.to] < 0) {
                    dist_u[a.to] = d + 2;
                    next_users.push_back(a.to);
                }
        frontier_users.swap(next_users);
        d += 2;
    }
}

// Exhaustive walk over simple alternating paths of exactly `edges_left` more
// edges, currently standing on a user vertex. Flags whether any terminating
// path carries an unbalanced intermediate item; stops early once one does.
struct PathScan {
    const InteractionGraph& g;
    std::int32_t target;
    std::vector<char> seen_u, seen_i;
    bool found_path = false;
    bool found_low = false;

    void from_user(std::int32_t cu, std::int32_t edges_left, bool disq) {
        if (found_low) return;
        if (edges_left == 1) {
            for (const WeightedArc& a : g.user_arcs(cu))
                if (a.to == target) {
                    found_path = true;
                    if (disq) found_low = true;
                    return;
                }
            return;
        }
        for (const WeightedArc& a : g.user_arcs(cu)) {
            const std::int32_t item = a.to;
            if (item == target || seen_i[item]) continue;
            seen_i[item] = 1;
            for (const WeightedArc& b : g.item_arcs(item)) {
                if (seen_u[b.to]) continue;
                seen_u[b.to] = 1;
                from_user(b.to, edges_left - 2, disq || !weights_equal(a.weight, b.weight));
                seen_u[b.to] = 0;
                if (found_low) break;
            }
            seen_i[item] = 0;
            if (found_low) break;
        }
    }
};

Confidence classify_by_paths(const InteractionGraph& g, std::int32_t u, std::int32_t i,
                             std::int32_t order) {
    PathScan scan{g, i};
    scan.seen_u.assign(g.n_users(), 0);
    scan.seen_i.assign(g.n_items(), 0);
    scan.seen_u[u] = 1;
    scan.from_user(u, 2 * order - 1, false);
    if (!scan.found_path) throw std::logic_error("no path of the claimed order");
    return scan.found_low ? Confidence::Low : Confidence::High;
}

int resolve_threads(int requested, std::int32_t n_users) {
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    if (const char* env = std::getenv("GLFA_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, std::min<int>(n, n_users));
}

struct UserScratch {
    std::vector<std::int32_t> dist_u, dist_i;
    std::vector<char> cor_state;     // 0 untouched, 1 balanced bridges only, 2 has unbalanced bridge
    std::vector<char> item_state;    // 0 untouched, 1 clean candidate, 2 disqualified
    std::vector<std::int32_t> touched_users, touched_items;
};

void mine_user(const InteractionGraph& g, std::int32_t u, std::int32_t max_order,
               UserScratch& s, std::vector<HoiRecord>& out, HoiStats& stats) {
    bfs_from_user(g, u, s.dist_u, s.dist_i);

    const auto arcs = g.user_arcs(u);
    const bool want_order2 = max_order >= 2;

    // Two-hop merge: a co-rater that shares any unequal-weight bridge item
    // with u disqualifies every candidate reached through it.
    if (want_order2) {
        for (const WeightedArc& a : arcs) {
            for (const WeightedArc& b : g.item_arcs(a.to)) {
                if (b.to == u) continue;
                const bool balanced = weights_equal(a.weight, b.weight);
                char& st = s.cor_state[b.to];
                if (st == 0) {
                    s.touched_users.push_back(b.to);
                    st = balanced ? 1 : 2;
                } else if (!balanced) {
                    st = 2;
                }
            }
        }
        for (std::int32_t cu : s.touched_users) {
            const bool poison = s.cor_state[cu] == 2;
            for (const WeightedArc& a : g.user_arcs(cu)) {
                if (s.dist_i[a.to] != 3) continue;  // not an order-2 candidate (or observed)
                char& st = s.item_state[a.to];
                if (st == 0) {
                    s.touched_items.push_back(a.to);
                    st = poison ? 2 : 1;
                } else if (poison) {
                    st = 2;
                }
            }
        }
    }

    for (std::int32_t i = 0; i < g.n_items(); ++i) {
        const std::int32_t d = s.dist_i[i];
        if (d == 1) continue;  // observed
        if (d < 0) {
            ++stats.n_unreachable;
            continue;
        }
        const std::int32_t order = (d + 1) / 2;
        if (order > max_order) {
            ++stats.n_beyond_cap;
            continue;
        }
        Confidence conf;
        if (order == 2) {
            const char st = s.item_state[i];
            if (st == 0) throw std::logic_error("order-2 candidate missed by two-hop merge");
            conf = st == 1 ? Confidence::High : Confidence::Low;
        } else {
            conf = classify_by_paths(g, u, i, order);
        }
        if (conf == Confidence::High) {
            ++stats.n_high;
            ++stats.high_per_order[order];
            out.push_back({u, i, order, Confidence::High});
        } else {
            ++stats.n_low;
            ++stats.low_per_order[order];
        }
    }

    for (std::int32_t cu : s.touched_users) s.cor_state[cu] = 0;
    for (std::int32_t ci : s.touched_items) s.item_state[ci] = 0;
    s.touched_users.clear();
    s.touched_items.clear();
}

}  // namespace

std::optional<std::int32_t> hoi_order(const InteractionGraph& g, std::int32_t u, std::int32_t i) {
    if (u < 0 || u >= g.n_users() || i < 0 || i >= g.n_items())
        throw std::out_of_range("vertex id out of range");
    if (g.has_edge(u, i))
        throw std::invalid_argument("(" + std::to_string(u) + "," + std::to_string(i) +
                                    ") is observed, not an indirect interaction");
    std::vector<std::int32_t> dist_u, dist_i;
    bfs_from_user(g, u, dist_u, dist_i);
    if (dist_i[i] < 0) return std::nullopt;
    return (dist_i[i] + 1) / 2;
}

Confidence classify_confidence(const InteractionGraph& g, std::int32_t u, std::int32_t i,
                               std::int32_t order) {
    const auto actual = hoi_order(g, u, i);
    if (!actual || *actual != order)
        throw std::invalid_argument("order " + std::to_string(order) + " is not the shortest order of (" +
                                    std::to_string(u) + "," + std::to_string(i) + ")");
    return classify_by_paths(g, u, i, order);
}

HoiSet high_confidence_set(const InteractionGraph& g, std::int32_t max_order, HoiStats* stats,
                           int n_threads) {
    if (g.n_edges() == 0) throw std::invalid_argument("empty graph");
    if (max_order < 2) throw std::invalid_argument("max_order must be at least 2");

    const std::int32_t n_users = g.n_users();
    const int threads = resolve_threads(n_threads, n_users);

    std::vector<std::vector<HoiRecord>> per_user(n_users);
    std::vector<HoiStats> per_thread_stats(threads);
    std::atomic<std::int32_t> next_user{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mtx;

    auto work = [&](int t) {
        UserScratch s;
        s.cor_state.assign(g.n_users(), 0);
        s.item_state.assign(g.n_items(), 0);
        try {
            while (true) {
                const std::int32_t u = next_user.fetch_add(1);
                if (u >= n_users) break;
                mine_user(g, u, max_order, s, per_user[u], per_thread_stats[t]);
            }
        } catch (...) {
            std::lock_guard lock(failure_mtx);
            if (!failure) failure = std::current_exception();
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<HoiRecord> all;
    std::size_t total = 0;
    for (const auto& v : per_user) total += v.size();
    all.reserve(total);
    for (auto& v : per_user) all.insert(all.end(), v.begin(), v.end());

    if (stats) {
        *stats = HoiStats{};
        for (const HoiStats& st : per_thread_stats) {
            stats->n_high += st.n_high;
            stats->n_low += st.n_low;
            stats->n_unreachable += st.n_unreachable;
            stats->n_beyond_cap += st.n_beyond_cap;
            for (const auto& [k, v] : st.high_per_order) stats->high_per_order[k] += v;
            for (const auto& [k, v] : st.low_per_order) stats->low_per_order[k] += v;
        }
    }
    return HoiSet(std::move(all));
}

}  // namespace glfa
