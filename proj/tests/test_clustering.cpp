#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "spectra/clustering.hpp"

using namespace spectra;

namespace {

std::vector<RegionIndex> line(std::initializer_list<int> xs) {
    std::vector<RegionIndex> out;
    for (int x : xs) out.push_back(RegionIndex{{x}});
    return out;
}

std::vector<RegionIndex> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, int span) {
    std::set<RegionIndex> pts;
    std::uniform_int_distribution<int> u(0, span);
    while (pts.size() < n) {
        RegionIndex r;
        for (std::size_t i = 0; i < d; ++i) r.idx.push_back(u(rng));
        pts.insert(r);
    }
    return {pts.begin(), pts.end()};
}

} // namespace

TEST(MinSamples, HandValues) {
    EXPECT_EQ(min_samples(0.01, 250), 3u);
    EXPECT_EQ(min_samples(0.01, 50), 1u);
    EXPECT_EQ(min_samples(1.0, 7), 7u);
    EXPECT_EQ(min_samples(0.5, 0), 1u);
}

TEST(PackingRadius, EnumeratedBalls) {
    EXPECT_EQ(packing_radius(3, 4, ClusterMetric::chebyshev), 1.0);
    EXPECT_EQ(packing_radius(1, 7, ClusterMetric::chebyshev), 1.0);
    EXPECT_EQ(packing_radius(82, 4, ClusterMetric::chebyshev), 2.0);
    EXPECT_EQ(packing_radius(81, 4, ClusterMetric::chebyshev), 1.0);
    EXPECT_EQ(packing_radius(10, 1, ClusterMetric::chebyshev), 5.0);
    EXPECT_DOUBLE_EQ(packing_radius(82, 4, ClusterMetric::euclidean), 4.0);
    for (std::size_t d = 1; d <= 6; ++d)
        for (std::size_t m = 1; m <= 400; m += 7) {
            const double r = packing_radius(m, d, ClusterMetric::chebyshev);
            EXPECT_GE(std::pow(2 * r + 1, double(d)), double(m));
            if (r > 1) {
                EXPECT_LT(std::pow(2 * r - 1, double(d)), double(m));
            }
        }
}

TEST(Dbscan, TwoLineClusters) {
    auto pts = line({1, 2, 3, 50, 51, 52});
    auto r = dbscan(pts, 1.0, 2, ClusterMetric::chebyshev);
    EXPECT_EQ(r.count, 2);
    EXPECT_EQ(r.labels, (std::vector<int>{1, 1, 1, 2, 2, 2}));
}

TEST(Dbscan, AllNoiseWhenSparse) {
    auto pts = line({0, 10, 20, 30});
    auto r = dbscan(pts, 1.0, 2, ClusterMetric::chebyshev);
    EXPECT_EQ(r.count, 0);
    EXPECT_EQ(r.labels, (std::vector<int>(4, kNoise)));
}

TEST(Dbscan, MinSamplesOneIsConnectedComponents) {
    auto pts = line({0, 1, 3, 4, 5, 9});
    auto r = dbscan(pts, 1.0, 1, ClusterMetric::chebyshev);
    EXPECT_EQ(r.count, 3);
    EXPECT_EQ(r.labels, (std::vector<int>{1, 1, 2, 2, 2, 3}));
    auto o = oracle::dbscan(pts, 1.0, 1, ClusterMetric::chebyshev);
    EXPECT_EQ(o.labels, r.labels);
}

TEST(Dbscan, BorderGoesToFirstCluster) {
    // 5 is a border point reached by cores 4 and 6 of two clusters
    auto pts = line({2, 3, 4, 5, 6, 7, 8});
    auto r = dbscan(pts, 1.0, 3, ClusterMetric::chebyshev);
    auto o = oracle::dbscan(pts, 1.0, 3, ClusterMetric::chebyshev);
    EXPECT_EQ(r.labels, o.labels);
    EXPECT_EQ(r.core, o.core);
}

TEST(Dbscan, RejectsBadParameters) {
    auto pts = line({1});
    EXPECT_THROW(dbscan(pts, 0.0, 1, ClusterMetric::chebyshev), InputError);
    EXPECT_THROW(dbscan(pts, 1.0, 0, ClusterMetric::chebyshev), InputError);
    EXPECT_EQ(dbscan(std::vector<RegionIndex>{}, 1.0, 1, ClusterMetric::chebyshev).count, 0);
}

TEST(Dbscan, MatchesBruteForceOracle) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 1 + trial % 4;
        const std::size_t n = 1 + rng() % 200;
        const int span = 3 + int(rng() % 25);
        auto pts = random_points(rng, std::min<std::size_t>(n, std::size_t(std::pow(span + 1, d))), d, span);
        const auto metric = trial % 2 ? ClusterMetric::euclidean : ClusterMetric::chebyshev;
        const double radius = 0.5 + double(rng() % 40) / 10.0;
        const std::size_t min_s = 1 + rng() % 8;
        auto r = dbscan(pts, radius, min_s, metric);
        auto o = oracle::dbscan(pts, radius, min_s, metric);
        ASSERT_EQ(r.core, o.core) << "trial " << trial;
        ASSERT_EQ(r.labels, o.labels) << "trial " << trial;
        ASSERT_EQ(r.count, o.count);
    }
}

TEST(Dbscan, CoreSetIndependentOfOrder) {
    std::mt19937_64 rng(77);
    auto pts = random_points(rng, 150, 3, 12);
    auto base = dbscan(pts, 1.0, 4, ClusterMetric::chebyshev);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<RegionIndex> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    auto r = dbscan(shuffled, 1.0, 4, ClusterMetric::chebyshev);
    for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(r.core[k], base.core[perm[k]]);
}

TEST(Dbscan, EveryClusterHasCore) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = random_points(rng, 120, 2, 20);
        auto r = dbscan(pts, 1.5, 3, ClusterMetric::euclidean);
        std::vector<bool> has_core(std::size_t(r.count) + 1, false);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (r.core[i]) has_core[std::size_t(r.labels[i])] = true;
        for (int c = 1; c <= r.count; ++c) EXPECT_TRUE(has_core[std::size_t(c)]);
    }
}

TEST(NeighborLists, HighDimensionMatchesBruteForce) {
    std::mt19937_64 rng(99);
    auto pts = random_points(rng, 400, 12, 4);
    for (double radius : {1.0, 2.0, 3.4641016151377544}) {
        for (auto metric : {ClusterMetric::chebyshev, ClusterMetric::euclidean}) {
            auto nb = detail::neighbor_lists(pts, radius, metric);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                std::vector<std::uint32_t> want;
                for (std::size_t j = 0; j < pts.size(); ++j)
                    if (oracle::distance(pts[i], pts[j], metric) <= radius) want.push_back(std::uint32_t(j));
                ASSERT_EQ(nb[i], want);
            }
        }
    }
}
