#pragma once

// The mining driver: enumerate candidate output sets, cluster the compatible
// interesting regions, turn clusters into interval specifications, and stop
// once the relaxed coverage threshold is met.

#include <set>

#include "spectra/clustering.hpp"
#include "spectra/core_model.hpp"
#include "spectra/metrics.hpp"
#include "spectra/parallel.hpp"
#include "spectra/region_analysis.hpp"

namespace spectra {

/// Streams every label set of size 1..tau_max over k labels, size ascending,
/// lexicographic on sorted label indices within a size.
class OmegaEnumerator {
public:
    OmegaEnumerator(std::size_t k, std::size_t tau_max) : k_(k), tau_max_(std::min(tau_max, k)) {
        if (k_ > LabelSet::kMaxLabels) throw InputError("alphabet too large to enumerate");
        start(1);
    }

    std::optional<LabelSet> next() {
        if (size_ == 0 || size_ > tau_max_) return std::nullopt;
        LabelSet s;
        for (std::size_t v : comb_) s.insert(v);
        advance();
        return s;
    }

    /// Size of the set the next call to next() returns (0 when exhausted).
    std::size_t pending_size() const { return (size_ == 0 || size_ > tau_max_) ? 0 : size_; }

private:
    void start(std::size_t size) {
        size_ = size;
        comb_.resize(size);
        std::iota(comb_.begin(), comb_.end(), std::size_t{0});
        if (size > k_) size_ = 0;
    }

    void advance() {
        std::size_t i = size_;
        while (i > 0 && comb_[i - 1] == k_ - size_ + (i - 1)) --i;
        if (i == 0) {
            start(size_ + 1);
            return;
        }
        ++comb_[i - 1];
        for (std::size_t j = i; j < size_; ++j) comb_[j] = comb_[j - 1] + 1;
    }

    std::size_t k_;
    std::size_t tau_max_;
    std::size_t size_ = 0;
    std::vector<std::size_t> comb_;
};

inline std::vector<LabelSet> enumerate_omegas(std::size_t k, std::size_t tau_max) {
    std::vector<LabelSet> out;
    OmegaEnumerator e(k, tau_max);
    while (auto s = e.next()) out.push_back(*s);
    return out;
}

/// Sum of C(k, i) for i = 1..tau_max.
inline std::size_t omega_count(std::size_t k, std::size_t tau_max) {
    std::size_t total = 0;
    std::size_t c = 1;
    for (std::size_t i = 1; i <= std::min(tau_max, k); ++i) {
        c = c * (k - i + 1) / i;
        total += c;
    }
    return total;
}

/// Positions (into table.entries) of the regions with Y_X inside omega.
inline std::vector<std::size_t> filter_omega(const InterestingRegionTable& table, LabelSet omega) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < table.entries.size(); ++i)
        if (table.entries[i].combined.is_subset_of(omega)) keep.push_back(i);
    return keep;
}

/// One specification per cluster with at least `min_members` members:
/// precondition is the grid-aligned bounding box of the member cells,
/// postcondition the union of their output sets. Noise yields nothing.
inline std::vector<Specification> cluster_to_specs(const ClusterResult& clusters, const InterestingRegionTable& table,
                                                   std::span<const std::size_t> selected, LabelSet omega,
                                                   std::size_t min_members = 1, std::size_t* dropped = nullptr) {
    if (clusters.labels.size() != selected.size()) throw Error("cluster labels do not match the selected regions");
    std::vector<Specification> specs(static_cast<std::size_t>(clusters.count));
    for (std::size_t p = 0; p < selected.size(); ++p) {
        const int id = clusters.labels[p];
        if (id == kNoise) continue;
        const RegionEntry& e = table.entries[selected[p]];
        Specification& s = specs[static_cast<std::size_t>(id - 1)];
        s.members.push_back(e.index);
        s.postcondition |= e.combined;
    }
    std::vector<Specification> out;
    for (auto& s : specs) {
        if (s.members.size() < min_members) {
            if (dropped) ++*dropped;
            continue;
        }
        s.omega = omega;
        s.precondition = bounding_box(table.grid, s.members);
        out.push_back(std::move(s));
    }
    return out;
}

/// Everything produced by one mining run.
struct MiningRun {
    SpecificationSet set;
    InterestingRegionTable table;
};

/// Runs the full pipeline. Deterministic for fixed inputs and config; Omega
/// subsets are processed in batches on worker threads but committed in
/// canonical order, so the result and the early-exit point do not depend on
/// the worker count.
inline MiningRun mine_detailed(const ObservationSet& obs, MinerConfig config, std::size_t workers = worker_count()) {
    config = validate_config(config, obs.alphabet());
    if (obs.empty()) throw InputError("cannot mine an empty observation set");

    MiningRun run;
    SpecificationSet& set = run.set;
    set.feature_names = obs.feature_names();
    set.alphabet = obs.alphabet();
    set.config = config;
    set.grid = partition(obs, config);

    std::size_t out_of_grid = 0;
    RegionTable raw = tally_regions(obs, set.grid, &out_of_grid);
    run.table = interesting(important(std::move(raw), obs, config.importance_fraction, config.importance_min_count),
                            obs.alphabet());
    const InterestingRegionTable& table = run.table;

    MiningSummary& sum = set.summary;
    sum.out_of_grid = out_of_grid;
    sum.interesting_regions = table.size();
    sum.omegas_total = omega_count(obs.alphabet().size(), config.tau_max);
    if (table.empty()) {
        sum.relaxed_coverage = std::nullopt;
        return run;
    }
    const std::size_t min_s = min_samples(config.tau_rep, table.size());
    const double radius = config.cluster_radius_override.value_or(
        packing_radius(min_s, obs.dims(), config.cluster_metric));
    sum.min_samples = min_s;
    sum.radius = radius;

    std::vector<bool> covered(table.size(), false);
    std::size_t covered_count = 0;
    std::set<std::pair<Precondition, std::uint64_t>> seen;

    struct OmegaResult {
        std::vector<Specification> specs;
        std::size_t dropped = 0;
    };
    auto process = [&](LabelSet omega) {
        OmegaResult r;
        const auto selected = filter_omega(table, omega);
        if (selected.empty()) return r;
        std::vector<RegionIndex> points;
        points.reserve(selected.size());
        for (std::size_t i : selected) points.push_back(table.entries[i].index);
        const ClusterResult clusters = dbscan(points, radius, min_s, config.cluster_metric);
        r.specs = cluster_to_specs(clusters, table, selected, omega, min_s, &r.dropped);
        return r;
    };

    OmegaEnumerator omegas(obs.alphabet().size(), config.tau_max);
    const std::size_t batch_size = std::max<std::size_t>(1, workers);
    bool done = false;
    while (!done) {
        std::vector<LabelSet> batch;
        while (batch.size() < batch_size) {
            auto o = omegas.next();
            if (!o) break;
            batch.push_back(*o);
        }
        if (batch.empty()) break;
        std::vector<OmegaResult> results(batch.size());
        parallel_for(batch.size(), workers, [&](std::size_t i) { results[i] = process(batch[i]); });

        for (auto& r : results) {
            ++sum.omegas_visited;
            sum.clusters_below_min_samples += r.dropped;
            for (auto& spec : r.specs) {
                if (!seen.emplace(spec.precondition, spec.postcondition.bits()).second) {
                    ++sum.duplicates_dropped;
                    continue;
                }
                for (std::size_t e = 0; e < table.size(); ++e) {
                    if (!covered[e] && region_accepted(spec, table.grid, table.entries[e].index)) {
                        covered[e] = true;
                        ++covered_count;
                    }
                }
                set.specs.push_back(std::move(spec));
            }
            const double cov = static_cast<double>(covered_count) / static_cast<double>(table.size());
            sum.relaxed_coverage = cov;
            if (cov >= config.tau_cov) {
                sum.coverage_reached = true;
                done = true;
                break;
            }
        }
    }
    return run;
}

inline SpecificationSet mine(const ObservationSet& obs, const MinerConfig& config) {
    return mine_detailed(obs, config).set;
}

} // namespace spectra
