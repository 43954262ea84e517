#pragma once

// Brute-force reference implementations used as test oracles. Each one is
// written independently of the library's fast paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "spectra/core_model.hpp"

namespace oracle {

using spectra::Label;
using spectra::RegionIndex;

inline double distance(const RegionIndex& a, const RegionIndex& b, spectra::ClusterMetric m) {
    if (m == spectra::ClusterMetric::chebyshev) {
        long best = 0;
        for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::labs(long(a[i]) - long(b[i])));
        return double(best);
    }
    long s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (long(a[i]) - long(b[i])) * (long(a[i]) - long(b[i]));
    return std::sqrt(double(s));
}

struct Clusters {
    std::vector<int> labels;
    std::vector<bool> core;
    int count = 0;
};

// O(n^2) DBSCAN: union-find over core points linked within the radius, ids by
// lowest core index of each component, border points to the lowest id among
// the core points that reach them.
inline Clusters dbscan(const std::vector<RegionIndex>& pts, double radius, std::size_t min_s,
                       spectra::ClusterMetric m) {
    const std::size_t n = pts.size();
    Clusters out;
    out.labels.assign(n, 0);
    out.core.assign(n, false);
    std::vector<std::vector<bool>> near(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) near[i][j] = distance(pts[i], pts[j], m) <= radius;
    for (std::size_t i = 0; i < n; ++i)
        out.core[i] = std::size_t(std::count(near[i].begin(), near[i].end(), true)) >= min_s;

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (out.core[i] && out.core[j] && near[i][j]) {
                std::size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::map<std::size_t, int> id_of_root;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.core[i]) continue;
        auto r = find(i);
        if (!id_of_root.contains(r)) id_of_root[r] = ++out.count;
        out.labels[i] = id_of_root[r];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (out.core[i]) continue;
        int best = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (out.core[j] && near[i][j] && (best == 0 || out.labels[j] < best)) best = out.labels[j];
        out.labels[i] = best;
    }
    return out;
}

inline bool inside(const spectra::Specification& s, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!s.precondition[i]) continue;
        if (x[i] < s.precondition[i]->lo) return false;
        if (x[i] > s.precondition[i]->hi) return false;
    }
    return true;
}

struct SupportCounts {
    std::size_t total = 0, covered = 0, satisfying = 0;
};

// Double loop: an observation is covered when any spec accepts it and
// satisfying when no accepting spec forbids its label.
inline SupportCounts support_confidence(const std::vector<spectra::Specification>& specs,
                                        const std::vector<spectra::Observation>& data) {
    SupportCounts c;
    c.total = data.size();
    for (const auto& o : data) {
        std::size_t accepting = 0, violated = 0;
        for (const auto& s : specs) {
            if (!inside(s, o.features)) continue;
            ++accepting;
            if (!s.postcondition.contains(o.output)) ++violated;
        }
        if (accepting > 0) {
            ++c.covered;
            if (violated == 0) ++c.satisfying;
        }
    }
    return c;
}

// Region tally by testing every observation against every candidate cell of
// the grid via explicit interval membership.
struct Tally {
    std::vector<std::size_t> counts;
    std::vector<std::uint64_t> labels; // bitmask per reference
};

inline std::map<std::vector<int>, Tally> tally(const spectra::ObservationSet& obs, const spectra::GridSpec& g) {
    std::map<std::vector<int>, Tally> out;
    const std::size_t q = obs.reference_count();
    const std::size_t p = g.parts();
    for (std::size_t j = 0; j < q; ++j) {
        for (const auto& o : obs.references()[j].observations) {
            std::vector<int> idx;
            bool ok = true;
            for (std::size_t i = 0; i < g.dims() && ok; ++i) {
                int found = -1;
                for (std::size_t k = 0; k < p; ++k) {
                    const double lo = g.boundary(i, std::int64_t(k));
                    const double hi = g.boundary(i, std::int64_t(k) + 1);
                    const bool last = k + 1 == p;
                    if (o.features[i] >= lo && (o.features[i] < hi || (last && o.features[i] <= hi))) {
                        found = int(k);
                        break;
                    }
                }
                if (found < 0) ok = false;
                idx.push_back(found);
            }
            if (!ok) continue;
            auto& t = out[idx];
            t.counts.resize(q, 0);
            t.labels.resize(q, 0);
            ++t.counts[j];
            t.labels[j] |= std::uint64_t{1} << o.output;
        }
    }
    return out;
}

} // namespace oracle
