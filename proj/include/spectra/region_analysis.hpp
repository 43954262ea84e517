#pragma once

// Grid partitioning and the interesting-region pipeline:
// partition -> tally_regions -> important -> interesting.

#include <cmath>
#include <ostream>
#include <unordered_map>

#include "spectra/core_model.hpp"

namespace spectra {

inline GridSpec partition(std::vector<double> lower, std::vector<double> upper, std::size_t parts) {
    return GridSpec(std::move(lower), std::move(upper), parts);
}

/// Grid over the observed bounding box of every reference's observations.
inline GridSpec partition(const ObservationSet& obs, std::size_t parts) {
    if (obs.empty()) throw InputError("cannot partition an empty observation set");
    return GridSpec(obs.observed_min(), obs.observed_max(), parts);
}

/// Grid bounds from the config override when present, otherwise observed.
inline GridSpec partition(const ObservationSet& obs, const MinerConfig& config) {
    if (config.grid_lower && config.grid_upper) {
        if (config.grid_lower->size() != obs.dims())
            throw ConfigError("grid_lower", "has " + std::to_string(config.grid_lower->size()) +
                                                " entries but the data has " + std::to_string(obs.dims()) +
                                                " dimensions");
        return GridSpec(*config.grid_lower, *config.grid_upper, config.parts);
    }
    return partition(obs, config.parts);
}

/// Sparse per-cell tallies. Observations outside the grid are skipped and
/// counted in `out_of_grid` when given.
inline RegionTable tally_regions(const ObservationSet& obs, const GridSpec& grid, std::size_t* out_of_grid = nullptr) {
    if (grid.dims() != obs.dims()) throw InputError("grid and observation dimensions differ");
    const std::size_t q = obs.reference_count();
    std::unordered_map<RegionIndex, RegionEntry, RegionIndexHash> cells;
    std::size_t outside = 0;
    for (std::size_t j = 0; j < q; ++j) {
        for (const auto& o : obs.references()[j].observations) {
            auto cell = grid.cell_of(o.features);
            if (!cell) {
                ++outside;
                continue;
            }
            auto [it, fresh] = cells.try_emplace(*cell);
            RegionEntry& e = it->second;
            if (fresh) {
                e.index = *cell;
                e.counts.assign(q, 0);
                e.per_ref_outputs.assign(q, LabelSet{});
            }
            ++e.counts[j];
            e.per_ref_outputs[j].insert(o.output);
            e.combined.insert(o.output);
        }
    }
    if (out_of_grid) *out_of_grid = outside;
    RegionTable table{grid, q, {}};
    table.entries.reserve(cells.size());
    for (auto& [key, entry] : cells) table.entries.push_back(std::move(entry));
    std::sort(table.entries.begin(), table.entries.end(),
              [](const RegionEntry& a, const RegionEntry& b) { return a.index < b.index; });
    return table;
}

/// Per-reference count floor: max(min_count, ceil(theta * |D_j|)).
inline std::vector<std::size_t> importance_thresholds(const ObservationSet& obs, double theta, std::size_t min_count) {
    std::vector<std::size_t> floor_j;
    for (const auto& r : obs.references()) {
        auto frac = static_cast<std::size_t>(std::ceil(theta * static_cast<double>(r.observations.size())));
        floor_j.push_back(std::max(min_count, frac));
    }
    return floor_j;
}

/// Keeps a region iff every reference meets its count floor there.
inline RegionTable important(RegionTable raw, const ObservationSet& obs, double theta, std::size_t min_count) {
    if (theta < 0.0 || theta > 1.0) throw InputError("importance fraction must lie in [0, 1]");
    const auto floor_j = importance_thresholds(obs, theta, min_count);
    std::erase_if(raw.entries, [&](const RegionEntry& e) {
        for (std::size_t j = 0; j < floor_j.size(); ++j)
            if (e.counts[j] < floor_j[j]) return true;
        return false;
    });
    return raw;
}

/// Keeps a region iff its combined output set is a strict subset of the alphabet.
inline InterestingRegionTable interesting(RegionTable filtered, const OutputAlphabet& alphabet) {
    const LabelSet all = alphabet.all();
    std::erase_if(filtered.entries, [&](const RegionEntry& e) { return !e.combined.is_strict_subset_of(all); });
    return filtered;
}

/// CSV dump of a region table: index vector, per-reference counts, combined outputs.
inline void write_region_dump(std::ostream& out, const RegionTable& table, const OutputAlphabet& alphabet,
                              const std::vector<std::string>& reference_names) {
    out << "index";
    for (const auto& r : reference_names) out << ",count_" << r;
    out << ",outputs\n";
    for (const auto& e : table.entries) {
        for (std::size_t i = 0; i < e.index.size(); ++i) out << (i ? " " : "") << e.index[i];
        for (std::size_t c : e.counts) out << ',' << c;
        out << ',';
        auto names = alphabet.names_of(e.combined);
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? " " : "") << names[i];
        out << '\n';
    }
}

} // namespace spectra
