#pragma once

// Specification quality metrics: volume, relaxed representation and coverage
// over interesting regions, and observation-level support and confidence.

#include <optional>

#include "spectra/core_model.hpp"

namespace spectra {

/// Sum over specs of the product of interval widths. Free dimensions span the
/// grid range; overlaps are counted once per spec.
inline double volume(std::span<const Specification> specs, const GridSpec& grid) {
    double total = 0.0;
    for (const auto& s : specs) {
        double v = 1.0;
        for (std::size_t i = 0; i < s.precondition.size(); ++i)
            v *= s.precondition[i] ? s.precondition[i]->width() : grid.upper()[i] - grid.lower()[i];
        total += v;
    }
    return total;
}

inline double volume(const SpecificationSet& set) { return volume(set.specs, set.grid); }

/// A region satisfies a precondition when its whole cell box lies inside.
inline bool region_accepted(const Specification& spec, const GridSpec& grid, const RegionIndex& region) {
    for (std::size_t i = 0; i < spec.precondition.size(); ++i) {
        const auto& iv = spec.precondition[i];
        if (!iv) continue;
        const Interval cell = grid.cell_interval(i, region[i]);
        if (cell.lo < iv->lo || cell.hi > iv->hi) return false;
    }
    return true;
}

/// Fraction of interesting regions accepted by the specification; nullopt for an empty table.
inline std::optional<double> relaxed_representation(const Specification& spec, const InterestingRegionTable& table) {
    if (table.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& e : table.entries) hit += region_accepted(spec, table.grid, e.index) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(table.size());
}

/// Fraction of interesting regions accepted by at least one spec.
inline std::optional<double> relaxed_coverage(std::span<const Specification> specs,
                                              const InterestingRegionTable& table) {
    if (table.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& e : table.entries) {
        for (const auto& s : specs) {
            if (region_accepted(s, table.grid, e.index)) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(table.size());
}

/// Support and confidence counts of a spec set on one reference's data.
/// Support: observations accepted by some precondition. Confidence: among
/// those, observations whose label satisfies every spec whose precondition
/// accepts them.
inline ReferenceMetrics evaluate_reference(std::span<const Specification> specs, const ReferenceData& data,
                                           std::size_t dims) {
    ReferenceMetrics m;
    m.reference = data.name;
    m.observations = data.observations.size();
    for (const auto& o : data.observations) {
        if (o.features.size() != dims) throw InputError("observation dimension does not match the specifications");
        bool covered = false;
        bool satisfied = true;
        for (const auto& s : specs) {
            if (!s.accepts(o.features)) continue;
            covered = true;
            if (!s.postcondition.contains(o.output)) {
                satisfied = false;
                break;
            }
        }
        if (covered) {
            ++m.covered;
            if (satisfied) ++m.satisfying;
        }
    }
    return m;
}

inline std::optional<double> support(std::span<const Specification> specs, const ReferenceData& data,
                                     std::size_t dims) {
    return evaluate_reference(specs, data, dims).support();
}

inline std::optional<double> confidence(std::span<const Specification> specs, const ReferenceData& data,
                                        std::size_t dims) {
    return evaluate_reference(specs, data, dims).confidence();
}

/// Per-reference support/confidence, plus relaxed metrics when a region table
/// is supplied, plus total volume.
inline EvalReport evaluate(const SpecificationSet& set, const ObservationSet& obs,
                           const InterestingRegionTable* table = nullptr) {
    if (obs.dims() != set.dims())
        throw InputError("dimension mismatch: specifications have " + std::to_string(set.dims()) +
                         " features, observations have " + std::to_string(obs.dims()));
    if (obs.feature_names() != set.feature_names) throw InputError("feature names of observations and specifications differ");
    EvalReport r;
    for (const auto& ref : obs.references()) {
        r.references.push_back(evaluate_reference(set.specs, ref, set.dims()));
        r.total_observations += r.references.back().observations;
        r.covered_observations += r.references.back().covered;
        r.satisfying_observations += r.references.back().satisfying;
    }
    if (table) {
        r.coverage = relaxed_coverage(set.specs, *table);
        for (const auto& s : set.specs) r.representation.push_back(relaxed_representation(s, *table));
    }
    r.volume = volume(set);
    return r;
}

/// Point-sample stand-ins for the exact representation and coverage: the
/// fraction of `sample` points accepted by one spec, or by any spec.
inline std::optional<double> sample_representation(const Specification& spec,
                                                   std::span<const std::vector<double>> sample) {
    if (sample.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& x : sample) hit += spec.accepts(x) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(sample.size());
}

inline std::optional<double> sample_coverage(std::span<const Specification> specs,
                                             std::span<const std::vector<double>> sample) {
    if (sample.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& x : sample)
        hit += std::any_of(specs.begin(), specs.end(), [&](const Specification& s) { return s.accepts(x); }) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(sample.size());
}

} // namespace spectra
