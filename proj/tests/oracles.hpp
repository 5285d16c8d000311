// Brute-force reference implementations, kept independent of the library's
// graph and SGD code paths. Test-only.
#ifndef GLFA_TESTS_ORACLES_HPP
#define GLFA_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "glfa/rng.hpp"
#include "glfa/sparse_matrix.hpp"

namespace oracle {

// Plain adjacency lists rebuilt straight from the entry list.
struct BipartiteRef {
    int n_users = 0, n_items = 0;
    std::vector<std::vector<std::pair<int, double>>> user_items, item_users;

    explicit BipartiteRef(const glfa::SparseMatrix& m)
        : n_users(m.n_rows()),
          n_items(m.n_cols()),
          user_items(m.n_rows()),
          item_users(m.n_cols()) {
        for (const glfa::Entry& e : m.entries()) {
            user_items[e.row].emplace_back(e.col, e.value);
            item_users[e.col].emplace_back(e.row, e.value);
        }
    }

    bool observed(int u, int i) const {
        for (const auto& [item, w] : user_items[u])
            if (item == i) return true;
        return false;
    }
};

struct PairProbe {
    bool reachable = false;
    int order = 0;                   // shortest path has 2*order - 1 edges
    bool low = false;                // some shortest path has an unbalanced intermediate item
};

// A weight sequence w1..w(2p-1) is unbalanced if any intermediate item (the
// j-th item vertex, j < p) sees different weights on its two path edges.
inline bool weights_unbalanced(const std::vector<double>& w) {
    for (std::size_t j = 1; j + 1 < w.size(); j += 2)
        if (std::abs(w[j - 1] - w[j]) > 1e-9) return true;
    return false;
}

// Enumerate every simple alternating path from user u to item i and reduce
// to (shortest length, any-unbalanced-among-shortest).
inline PairProbe probe_pair(const BipartiteRef& g, int u, int i) {
    PairProbe result;
    std::vector<char> on_path_u(g.n_users, 0), on_path_i(g.n_items, 0);
    std::vector<double> weights;
    int best_len = -1;
    bool best_low = false;

    auto consider = [&](int len) {
        const bool unbal = weights_unbalanced(weights);
        if (best_len < 0 || len < best_len) {
            best_len = len;
            best_low = unbal;
        } else if (len == best_len) {
            best_low = best_low || unbal;
        }
    };

    // Depth-first over user vertices; weights holds the edge sequence so far.
    // Branches that can no longer tie the best length are cut: only paths of
    // the shortest length matter for the verdict.
    auto dfs = [&](auto&& self, int cu) -> void {
        const int len = static_cast<int>(weights.size());
        if (best_len >= 0 && len + 1 > best_len) return;
        for (const auto& [item, w1] : g.user_items[cu]) {
            if (item == i) {
                weights.push_back(w1);
                consider(static_cast<int>(weights.size()));
                weights.pop_back();
                continue;
            }
            if (best_len >= 0 && len + 3 > best_len) continue;
            if (on_path_i[item]) continue;
            on_path_i[item] = 1;
            for (const auto& [nu, w2] : g.item_users[item]) {
                if (on_path_u[nu]) continue;
                on_path_u[nu] = 1;
                weights.push_back(w1);
                weights.push_back(w2);
                self(self, nu);
                weights.pop_back();
                weights.pop_back();
                on_path_u[nu] = 0;
            }
            on_path_i[item] = 0;
        }
    };
    on_path_u[u] = 1;
    dfs(dfs, u);

    if (best_len < 0) return result;
    result.reachable = true;
    result.order = (best_len + 1) / 2;
    result.low = best_low;
    return result;
}

// Random bipartite instance with integer weights in [1, 5] and at least one
// edge; used for property tests against the implementation.
inline glfa::SparseMatrix random_matrix(std::mt19937_64& eng, int max_users = 8,
                                        int max_items = 8, double edge_prob = 0.35) {
    while (true) {
        const int nu = 2 + static_cast<int>(glfa::uniform_below(eng, max_users - 1));
        const int ni = 2 + static_cast<int>(glfa::uniform_below(eng, max_items - 1));
        std::vector<glfa::Entry> entries;
        for (int u = 0; u < nu; ++u)
            for (int i = 0; i < ni; ++i)
                if (glfa::uniform_open01(eng) < edge_prob) {
                    const double w = 1.0 + static_cast<double>(glfa::uniform_below(eng, 5));
                    entries.push_back({u, i, w});
                }
        if (!entries.empty())
            return glfa::SparseMatrix(nu, ni, std::move(entries));
    }
}

// Instantaneous single-entry loss used by the finite-difference gradient
// checks: squared residual (alpha-weighted for pseudo entries) plus the
// regularization of the two touched rows.
inline double instant_loss(const std::vector<double>& x, const std::vector<double>& y, double r,
                           bool pseudo, double lambda, double alpha) {
    double dot = 0;
    for (std::size_t t = 0; t < x.size(); ++t) dot += x[t] * y[t];
    const double res = r - dot;
    double reg = 0;
    for (double v : x) reg += v * v;
    for (double v : y) reg += v * v;
    const double weight = pseudo ? alpha : 1.0;
    return 0.5 * weight * res * res + 0.5 * lambda * reg;
}

}  // namespace oracle

#endif
