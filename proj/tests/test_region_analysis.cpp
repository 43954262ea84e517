#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "spectra/region_analysis.hpp"

using namespace spectra;

namespace {

ObservationSet two_refs(std::vector<std::pair<std::vector<double>, Label>> a,
                        std::vector<std::pair<std::vector<double>, Label>> b, OutputAlphabet alpha) {
    const std::size_t d = a.empty() ? b.front().first.size() : a.front().first.size();
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    ObservationSet s(names, alpha);
    auto ra = s.reference("a");
    auto rb = s.reference("b");
    for (auto& [x, y] : a) s.add(ra, {x, y, "t", 0});
    for (auto& [x, y] : b) s.add(rb, {x, y, "t", 0});
    return s;
}

} // namespace

TEST(Partition, UnitSquareTwoParts) {
    auto g = partition({0.0, 0.0}, {1.0, 1.0}, 2);
    EXPECT_DOUBLE_EQ(g.width(0), 0.5);
    EXPECT_DOUBLE_EQ(g.width(1), 0.5);
    std::vector<double> corner{1.0, 1.0};
    EXPECT_EQ(g.cell_of(corner)->idx, (std::vector<std::int32_t>{1, 1}));
    std::vector<double> mid{0.5, 0.49};
    EXPECT_EQ(g.cell_of(mid)->idx, (std::vector<std::int32_t>{1, 0}));
    std::vector<double> out{1.5, 0.0};
    EXPECT_FALSE(g.cell_of(out));
}

TEST(Partition, DegenerateObservedDimension) {
    auto s = two_refs({{{0.0, 1.0}, 0}}, {{{1.0, 1.0}, 0}}, OutputAlphabet({"a", "b"}));
    try {
        partition(s, 4);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("dimension 1"), std::string::npos);
    }
}

TEST(Partition, AbrScaleIsSparse) {
    auto g = partition({0, 0, 0, 0}, {6, 2, 2, 2}, 100);
    EXPECT_EQ(g.parts(), 100u);
    std::vector<double> x{0.45, 0.3, 0.3, 0.6};
    EXPECT_EQ(g.cell_of(x)->idx, (std::vector<std::int32_t>{7, 15, 15, 30}));
}

TEST(Tally, OneObservationEachSameLabel) {
    OutputAlphabet alpha({"red", "black"});
    auto s = two_refs({{{0.1, 0.1}, 0}}, {{{0.2, 0.2}, 0}}, alpha);
    auto t = tally_regions(s, partition({0, 0}, {1, 1}, 2));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.entries[0].counts, (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(t.entries[0].combined, LabelSet::of({0}));
}

TEST(Tally, EmptySetGivesEmptyTable) {
    ObservationSet s({"x"}, OutputAlphabet({"a", "b"}));
    s.reference("r");
    EXPECT_TRUE(tally_regions(s, partition({0}, {1}, 4)).empty());
}

TEST(Tally, UnionOfReferenceOutputs) {
    auto s = two_refs({{{0.1}, 0}}, {{{0.2}, 1}}, OutputAlphabet({"a", "b", "c"}));
    auto t = tally_regions(s, partition({0}, {1}, 2));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.entries[0].per_ref_outputs[0], LabelSet::of({0}));
    EXPECT_EQ(t.entries[0].per_ref_outputs[1], LabelSet::of({1}));
    EXPECT_EQ(t.entries[0].combined, LabelSet::of({0, 1}));
}

TEST(Tally, MatchesBruteForce) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 1 + trial % 3;
        std::vector<std::string> names(d, "x");
        for (std::size_t i = 0; i < d; ++i) names[i] += std::to_string(i);
        ObservationSet s(names, OutputAlphabet({"a", "b", "c", "d"}));
        std::uniform_real_distribution<double> u(-0.2, 1.2);
        std::uniform_int_distribution<int> lab(0, 3);
        for (int j = 0; j < 3; ++j) {
            auto r = s.reference("r" + std::to_string(j));
            for (int n = 0; n < 3000; ++n) {
                std::vector<double> x(d);
                for (auto& v : x) v = u(rng);
                if (n % 50 == 0) x[0] = 1.0; // upper face
                s.add(r, {x, Label(lab(rng)), "t", 0});
            }
        }
        auto g = spectra::partition(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), 7);
        std::size_t outside = 0;
        auto table = tally_regions(s, g, &outside);
        auto ref = oracle::tally(s, g);
        ASSERT_EQ(table.size(), ref.size());
        std::size_t inside = 0;
        auto it = ref.begin();
        for (const auto& e : table.entries) {
            std::vector<int> key(e.index.idx.begin(), e.index.idx.end());
            ASSERT_EQ(key, it->first);
            EXPECT_EQ(e.counts, it->second.counts);
            for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(e.per_ref_outputs[j].bits(), it->second.labels[j]);
            for (auto c : e.counts) inside += c;
            ++it;
        }
        EXPECT_EQ(inside + outside, s.size());
    }
}

TEST(Important, PerReferenceFloor) {
    OutputAlphabet alpha({"a", "b"});
    std::vector<std::pair<std::vector<double>, Label>> a{{{0.1}, 0}, {{0.2}, 0}, {{0.6}, 0}, {{0.7}, 0}, {{0.8}, 0}};
    std::vector<std::pair<std::vector<double>, Label>> b{{{0.1}, 0}, {{0.3}, 0}};
    auto s = two_refs(a, b, alpha);
    auto t = important(tally_regions(s, partition({0}, {1}, 2)), s, 0.0, 2);
    ASSERT_EQ(t.size(), 1u); // counts (2,2) kept, (3,0) dropped
    EXPECT_EQ(t.entries[0].index.idx[0], 0);
}

TEST(Important, FractionalFloorByHand) {
    // |D_j| = 10, theta 0.5 -> ceil(5) = 5 per reference
    OutputAlphabet alpha({"a", "b"});
    auto build = [&](int in_a, int in_b) {
        std::vector<std::pair<std::vector<double>, Label>> a, b;
        for (int i = 0; i < 10; ++i) a.push_back({{i < in_a ? 0.1 : 0.9}, 0});
        for (int i = 0; i < 10; ++i) b.push_back({{i < in_b ? 0.1 : 0.9}, 0});
        return two_refs(a, b, alpha);
    };
    auto kept = [&](int in_a, int in_b) {
        auto s = build(in_a, in_b);
        auto t = important(tally_regions(s, partition({0}, {1}, 2)), s, 0.5, 2);
        return std::any_of(t.entries.begin(), t.entries.end(), [](const RegionEntry& e) { return e.index.idx[0] == 0; });
    };
    EXPECT_TRUE(kept(5, 5));
    EXPECT_FALSE(kept(4, 5));
    EXPECT_EQ(importance_thresholds(build(5, 5), 0.5, 2), (std::vector<std::size_t>{5, 5}));
}

TEST(Important, MonotoneInThresholds) {
    std::mt19937_64 rng(8);
    OutputAlphabet alpha({"a", "b", "c"});
    std::vector<std::pair<std::vector<double>, Label>> a, b;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 2000; ++i) a.push_back({{u(rng) * u(rng), u(rng)}, Label(i % 3)});
    for (int i = 0; i < 1500; ++i) b.push_back({{u(rng), u(rng) * u(rng)}, Label(i % 2)});
    auto s = two_refs(a, b, alpha);
    auto raw = tally_regions(s, partition({0, 0}, {1, 1}, 10));
    std::size_t prev = raw.size() + 1;
    for (double theta : {0.0, 0.001, 0.002, 0.005, 0.01}) {
        for (std::size_t m : {1u, 2u, 4u}) {
            auto t = important(raw, s, theta, m);
            auto looser = important(raw, s, theta, 1);
            EXPECT_LE(t.size(), looser.size());
            for (const auto& e : t.entries)
                EXPECT_TRUE(std::any_of(looser.entries.begin(), looser.entries.end(),
                                        [&](const RegionEntry& f) { return f.index == e.index; }));
        }
        auto t = important(raw, s, theta, 1);
        EXPECT_LE(t.size(), prev);
        prev = t.size();
        auto i = interesting(t, alpha);
        EXPECT_LE(i.size(), t.size());
        for (const auto& e : i.entries) EXPECT_TRUE(e.combined.is_strict_subset_of(alpha.all()));
    }
}

TEST(Interesting, StrictSubsetRule) {
    OutputAlphabet six({"300", "750", "1200", "1850", "2850", "4300"});
    RegionTable t;
    t.grid = partition({0}, {1}, 3);
    t.references = 1;
    t.entries.push_back({RegionIndex{{0}}, {2}, {LabelSet::of({0, 1})}, LabelSet::of({0, 1})});
    t.entries.push_back({RegionIndex{{1}}, {2}, {six.all()}, six.all()});
    auto out = interesting(t, six);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out.entries[0].index.idx[0], 0);

    RegionTable s;
    s.grid = t.grid;
    s.references = 1;
    s.entries.push_back({RegionIndex{{2}}, {2}, {LabelSet::of({0})}, LabelSet::of({0})});
    EXPECT_EQ(interesting(s, OutputAlphabet::sign()).size(), 1u);
}

TEST(RegionDump, CsvLayout) {
    OutputAlphabet alpha({"a", "b", "c"});
    auto s = two_refs({{{0.1}, 0}, {{0.1}, 0}}, {{{0.2}, 1}, {{0.2}, 1}}, alpha);
    auto t = interesting(important(tally_regions(s, partition({0}, {1}, 2)), s, 0.0, 2), alpha);
    std::ostringstream out;
    write_region_dump(out, t, alpha, {"a", "b"});
    EXPECT_EQ(out.str(), "index,count_a,count_b,outputs\n0,2,2,a b\n");
}
