#pragma once

// Density-based clustering of region index vectors on the integer lattice.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "spectra/core_model.hpp"

namespace spectra {

inline constexpr int kNoise = 0;

struct ClusterResult {
    std::vector<int> labels;  // aligned with the input points; kNoise or 1..count
    std::vector<bool> core;
    int count = 0;

    friend bool operator==(const ClusterResult&, const ClusterResult&) = default;
};

/// Cluster size needed to reach the representation threshold:
/// max(1, ceil(tau_rep * n_interesting)).
inline std::size_t min_samples(double tau_rep, std::size_t n_interesting) {
    auto m = static_cast<std::size_t>(std::ceil(tau_rep * static_cast<double>(n_interesting)));
    return std::max<std::size_t>(1, m);
}

/// Smallest radius whose densely packed lattice ball holds min_s points.
/// Chebyshev: smallest integer r >= 1 with (2r+1)^d >= min_s. Euclidean: that
/// r scaled by sqrt(d), which circumscribes the Chebyshev ball.
inline double packing_radius(std::size_t min_s, std::size_t dims, ClusterMetric metric) {
    if (min_s < 1 || dims < 1) throw InputError("packing radius needs min_s >= 1 and d >= 1");
    std::uint64_t r = 1;
    auto ball = [&](std::uint64_t rr) {
        // (2r+1)^d with saturation
        double side = static_cast<double>(2 * rr + 1);
        double v = 1.0;
        for (std::size_t i = 0; i < dims && v < static_cast<double>(min_s); ++i) v *= side;
        return v;
    };
    while (ball(r) < static_cast<double>(min_s)) ++r;
    const double cheb = static_cast<double>(r);
    return metric == ClusterMetric::chebyshev ? cheb : cheb * std::sqrt(static_cast<double>(dims));
}

/// Distance between two lattice points under the metric.
inline double lattice_distance(const RegionIndex& a, const RegionIndex& b, ClusterMetric metric) {
    if (metric == ClusterMetric::chebyshev) {
        std::int64_t m = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max<std::int64_t>(m, std::abs(static_cast<std::int64_t>(a[i]) - b[i]));
        return static_cast<double>(m);
    }
    std::int64_t s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t d = static_cast<std::int64_t>(a[i]) - b[i];
        s += d * d;
    }
    return std::sqrt(static_cast<double>(s));
}

namespace detail {

/// Neighbor lists (self included) from a hash of points bucketed on a few
/// high-spread projection axes. Buckets have side max(1, floor(radius)), so
/// every neighbor sits in one of the 3^k adjacent buckets.
inline std::vector<std::vector<std::uint32_t>> neighbor_lists(std::span<const RegionIndex> points, double radius,
                                                              ClusterMetric metric) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::uint32_t>> nbrs(n);
    if (n == 0) return nbrs;
    const std::size_t d = points.front().size();
    const auto reach = static_cast<std::int64_t>(std::floor(radius));
    const std::int64_t side = std::max<std::int64_t>(1, reach);

    std::vector<std::size_t> axes(d);
    std::iota(axes.begin(), axes.end(), 0);
    std::vector<std::int64_t> spread(d, 0);
    for (std::size_t i = 0; i < d; ++i) {
        std::int64_t lo = points[0][i], hi = points[0][i];
        for (const auto& p : points) {
            lo = std::min<std::int64_t>(lo, p[i]);
            hi = std::max<std::int64_t>(hi, p[i]);
        }
        spread[i] = hi - lo;
    }
    std::stable_sort(axes.begin(), axes.end(), [&](std::size_t a, std::size_t b) { return spread[a] > spread[b]; });
    const std::size_t k = std::min<std::size_t>(d, 4);
    axes.resize(k);

    auto floordiv = [](std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    auto bucket_key = [&](const std::array<std::int64_t, 4>& b) {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::size_t i = 0; i < k; ++i) {
            h ^= static_cast<std::uint64_t>(b[i]);
            h *= 1099511628211ULL;
        }
        return h;
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    std::vector<std::array<std::int64_t, 4>> coords(n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t i = 0; i < k; ++i) coords[p][i] = floordiv(points[p][axes[i]], side);
        buckets[bucket_key(coords[p])].push_back(static_cast<std::uint32_t>(p));
    }

    std::size_t probes = 1;
    for (std::size_t i = 0; i < k; ++i) probes *= 3;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t code = 0; code < probes; ++code) {
            std::array<std::int64_t, 4> b = coords[p];
            std::size_t c = code;
            for (std::size_t i = 0; i < k; ++i, c /= 3) b[i] += static_cast<std::int64_t>(c % 3) - 1;
            auto it = buckets.find(bucket_key(b));
            if (it == buckets.end()) continue;
            for (std::uint32_t q : it->second) {
                bool same_bucket = true;
                for (std::size_t i = 0; i < k; ++i) same_bucket = same_bucket && coords[q][i] == b[i];
                if (!same_bucket) continue; // hash collision
                if (lattice_distance(points[p], points[q], metric) <= radius) nbrs[p].push_back(q);
            }
        }
        std::sort(nbrs[p].begin(), nbrs[p].end());
    }
    return nbrs;
}

} // namespace detail

/// DBSCAN over distinct lattice points. A point is core when at least min_s
/// points (itself included) lie within `radius`. Points are scanned in input
/// order; each unlabeled core point opens the next cluster id, which then
/// absorbs every density-reachable point not already claimed. Border points
/// therefore belong to the lowest-id cluster that reaches them.
inline ClusterResult dbscan(std::span<const RegionIndex> points, double radius, std::size_t min_s,
                            ClusterMetric metric) {
    if (!(radius > 0.0)) throw InputError("cluster radius must be positive");
    if (min_s < 1) throw InputError("min_samples must be at least 1");
    const std::size_t n = points.size();
    ClusterResult res;
    res.labels.assign(n, kNoise);
    res.core.assign(n, false);
    const auto nbrs = detail::neighbor_lists(points, radius, metric);
    for (std::size_t p = 0; p < n; ++p) res.core[p] = nbrs[p].size() >= min_s;

    std::deque<std::uint32_t> frontier;
    for (std::size_t p = 0; p < n; ++p) {
        if (!res.core[p] || res.labels[p] != kNoise) continue;
        const int id = ++res.count;
        res.labels[p] = id;
        frontier.push_back(static_cast<std::uint32_t>(p));
        while (!frontier.empty()) {
            const std::uint32_t c = frontier.front();
            frontier.pop_front();
            for (std::uint32_t q : nbrs[c]) {
                if (res.labels[q] != kNoise) continue;
                res.labels[q] = id;
                if (res.core[q]) frontier.push_back(q);
            }
        }
    }
    return res;
}

} // namespace spectra
