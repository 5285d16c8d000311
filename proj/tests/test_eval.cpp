#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glfa/metrics.hpp"
#include "glfa/rng.hpp"
#include "test_util.hpp"

using namespace glfa;

namespace {
const ValueRange kStars{1.0, 5.0};

FactorModel model_with(std::int32_t n, std::int32_t f, double fill) {
    FactorModel m(n, n, f, kStars);
    for (std::int32_t u = 0; u < n; ++u)
        for (double& v : m.x_row(u)) v = fill;
    for (std::int32_t i = 0; i < n; ++i)
        for (double& v : m.y_row(i)) v = fill;
    return m;
}

// One-sided tail probability by literal enumeration of all sign assignments.
double enumerate_p_greater(const std::vector<double>& ranks, double r_plus) {
    const std::size_t n = ranks.size();
    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double sum = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (mask & (std::size_t{1} << k)) sum += ranks[k];
        if (sum >= r_plus - 1e-12) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

std::vector<double> ranked_abs(const std::vector<double>& diffs) {
    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });
    std::vector<double> rank(n);
    for (std::size_t k = 0; k < n;) {
        std::size_t j = k;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[k]])) ++j;
        for (std::size_t t = k; t <= j; ++t) rank[order[t]] = 0.5 * (k + j) + 1.0;
        k = j + 1;
    }
    return rank;
}

}  // namespace

TEST_CASE("score computes rmse and mae over all test entries") {
    SUBCASE("perfect predictions") {
        FactorModel m = model_with(4, 1, 1.0);  // every prediction is 1
        SparseMatrix test(4, 4, {{0, 1, 1.0}, {2, 3, 1.0}});
        Scorecard card = score(m, test, 0.0);
        CHECK(card.rmse == 0.0);
        CHECK(card.mae == 0.0);
        CHECK(card.n_scored == 2);
        CHECK(card.n_cold == 0);
    }
    SUBCASE("errors +1 and -1") {
        FactorModel m = model_with(4, 1, 1.0);
        SparseMatrix test(4, 4, {{0, 1, 2.0}, {2, 3, 0.0}});
        Scorecard card = score(m, test, 0.0);
        CHECK(card.rmse == doctest::Approx(1.0));
        CHECK(card.mae == doctest::Approx(1.0));
    }
    SUBCASE("errors 0 and 2") {
        FactorModel m = model_with(4, 1, 1.0);
        SparseMatrix test(4, 4, {{0, 1, 1.0}, {2, 3, 3.0}});
        Scorecard card = score(m, test, 0.0);
        CHECK(card.rmse == doctest::Approx(std::sqrt(2.0)));
        CHECK(card.mae == doctest::Approx(1.0));
    }
    SUBCASE("empty test set is an error") {
        FactorModel m = model_with(4, 1, 1.0);
        CHECK_THROWS_AS(score(m, SparseMatrix(4, 4, {}), 0.0), std::invalid_argument);
    }
}

TEST_CASE("cold entries use the fallback and are counted") {
    SUBCASE("detected through the seen mask") {
        SparseMatrix train(4, 4, {{0, 0, 3.0}, {1, 1, 4.0}});
        const SeenMask mask = seen_mask(train);
        FactorModel m = model_with(4, 1, 1.0);
        // user 2 unseen, item 3 unseen
        SparseMatrix test(4, 4, {{2, 0, 3.5}, {0, 3, 3.5}, {0, 0, 3.5}});
        Scorecard card = score(m, test, 3.5, &mask);
        CHECK(card.n_cold == 2);
        // two fallback hits are exact; the warm one misses by 2.5
        CHECK(card.mae == doctest::Approx(2.5 / 3.0));
    }
    SUBCASE("detected through all-zero factor rows without a mask") {
        FactorModel m = model_with(4, 2, 1.0);
        for (double& v : m.x_row(2)) v = 0.0;
        SparseMatrix test(4, 4, {{2, 1, 4.0}, {0, 1, 2.0}});
        Scorecard card = score(m, test, 4.0);
        CHECK(card.n_cold == 1);
        CHECK(card.rmse == doctest::Approx(0.0));  // fallback hits 4.0; warm predicts 2.0
    }
}

TEST_CASE("score is permutation invariant") {
    std::mt19937_64 eng(8);
    FactorModel m = init_model(10, 10, 3, 4, 3.0, kStars);
    std::vector<Entry> entries;
    for (int k = 0; k < 40; ++k)
        entries.push_back({static_cast<std::int32_t>(uniform_below(eng, 10)),
                           static_cast<std::int32_t>(uniform_below(eng, 10)),
                           1 + 4 * uniform_open01(eng)});
    // dedupe
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const Entry& a, const Entry& b) {
                                  return a.row == b.row && a.col == b.col;
                              }),
                  entries.end());
    SparseMatrix test(10, 10, entries);
    fisher_yates(entries, eng);
    SparseMatrix shuffled(10, 10, entries);

    Scorecard a = score(m, test, 3.0);
    Scorecard b = score(m, shuffled, 3.0);
    CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-12));
    CHECK(a.mae == doctest::Approx(b.mae).epsilon(1e-12));

    // rmse^2 * n equals an independently recomputed squared-error sum
    double sse = 0;
    for (const Entry& e : test.entries()) {
        const double err = e.value - m.predict(e.row, e.col);
        sse += err * err;
    }
    CHECK(a.rmse * a.rmse * static_cast<double>(a.n_scored) ==
          doctest::Approx(sse).epsilon(1e-9));
}

TEST_CASE("wilcoxon reproduces the reference triples") {
    // five wins for b with one smallest-magnitude reversal
    std::vector<double> a{2, 3, 4, 5, 6, 1};
    std::vector<double> b{0, 0, 0, 0, 0, 2};
    WilcoxonResult one = wilcoxon_signed_rank(a, b, Tail::OneSided);
    CHECK(one.r_plus == 20.0);
    CHECK(one.r_minus == 1.0);
    CHECK(one.p_value == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(one.exact);

    // clean sweep
    std::vector<double> c{1, 2, 3, 4, 5, 6};
    std::vector<double> z{0, 0, 0, 0, 0, 0};
    WilcoxonResult sweep = wilcoxon_signed_rank(c, z, Tail::OneSided);
    CHECK(sweep.r_plus == 21.0);
    CHECK(sweep.r_minus == 0.0);
    CHECK(sweep.p_value == doctest::Approx(0.015625).epsilon(1e-12));

    WilcoxonResult two = wilcoxon_signed_rank(a, b, Tail::TwoSided);
    CHECK(two.p_value == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("wilcoxon input validation") {
    std::vector<double> a{1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, std::vector<double>{1, 2}, Tail::TwoSided),
                    std::invalid_argument);
    CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{1, 2}, std::vector<double>{1, 2},
                                         Tail::TwoSided),
                    std::invalid_argument);
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, a, Tail::TwoSided), std::runtime_error);
}

TEST_CASE("rank sums always add to n(n+1)/2") {
    std::mt19937_64 eng(44);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + uniform_below(eng, 16);
        std::vector<double> a(n), b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = static_cast<double>(uniform_below(eng, 8));
            b[k] = static_cast<double>(uniform_below(eng, 8));  // frequent ties and zeros
        }
        try {
            WilcoxonResult res = wilcoxon_signed_rank(a, b, Tail::TwoSided);
            const double expect = static_cast<double>(res.n_used) * (res.n_used + 1) / 2.0;
            CHECK(res.r_plus + res.r_minus == doctest::Approx(expect).epsilon(1e-12));
        } catch (const std::runtime_error&) {
            // all differences were zero; nothing to check
        }
    }
}

TEST_CASE("exact p-values match full sign enumeration up to n = 12") {
    std::mt19937_64 eng(4242);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 5 + uniform_below(eng, 8);  // 5..12 pairs
        std::vector<double> a(n), b(n, 0.0), diffs(n);
        for (std::size_t k = 0; k < n; ++k) {
            double d = 0;
            while (d == 0) d = std::round(10 * (uniform_open01(eng) - 0.5)) / 5.0;
            a[k] = d;
            diffs[k] = d;
        }
        WilcoxonResult res = wilcoxon_signed_rank(a, b, Tail::OneSided);
        REQUIRE(res.exact);
        const std::vector<double> ranks = ranked_abs(diffs);
        CHECK(res.p_value == doctest::Approx(enumerate_p_greater(ranks, res.r_plus)).epsilon(1e-12));
    }
}

TEST_CASE("large samples use the tie-corrected normal approximation") {
    // frozen reference computed with scipy.stats.wilcoxon (mode='approx',
    // correction=False) on this fixed 30-pair instance
    std::vector<double> deltas{0.1,  0.05, -0.02, 0.08, 0.1,  -0.05, 0.03, 0.07, 0.1,  -0.02,
                               0.05, 0.08, 0.03,  -0.04, 0.06, 0.1,   0.02, 0.05, -0.03, 0.07,
                               0.04, 0.09, 0.05,  0.02, -0.06, 0.08,  0.03, 0.05, 0.07,  0.04};
    std::vector<double> a(deltas.size(), 5.0), b(deltas.size());
    for (std::size_t k = 0; k < deltas.size(); ++k) b[k] = 5.0 - deltas[k];

    WilcoxonResult one = wilcoxon_signed_rank(a, b, Tail::OneSided);
    CHECK_FALSE(one.exact);
    CHECK(one.r_plus == doctest::Approx(410.5));
    CHECK(one.r_minus == doctest::Approx(54.5));
    CHECK(one.p_value == doctest::Approx(0.00012187505629196338).epsilon(1e-9));

    WilcoxonResult two = wilcoxon_signed_rank(a, b, Tail::TwoSided);
    CHECK(two.p_value == doctest::Approx(0.00024375011258392676).epsilon(1e-9));

    SUBCASE("swapping the vectors mirrors the rank sums") {
        WilcoxonResult swapped = wilcoxon_signed_rank(b, a, Tail::TwoSided);
        CHECK(swapped.r_plus == doctest::Approx(one.r_minus));
        CHECK(swapped.r_minus == doctest::Approx(one.r_plus));
        CHECK(swapped.p_value == doctest::Approx(two.p_value).epsilon(1e-12));
    }
}
