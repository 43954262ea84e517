#pragma once

// Domain types shared by every stage of the miner: observations, the grid,
// region tables, specifications and the miner configuration.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "spectra/error.hpp"

namespace spectra {

/// Index into an OutputAlphabet.
using Label = std::size_t;

/// A set of output labels, stored as a bitmask over alphabet indices.
class LabelSet {
public:
    static constexpr std::size_t kMaxLabels = 64;

    constexpr LabelSet() = default;

    static constexpr LabelSet from_bits(std::uint64_t bits) { return LabelSet(bits); }

    static LabelSet of(std::initializer_list<Label> labels) {
        LabelSet s;
        for (Label l : labels) s.insert(l);
        return s;
    }

    /// {0, ..., k-1}
    static constexpr LabelSet all(std::size_t k) {
        return LabelSet(k >= kMaxLabels ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1));
    }

    void insert(Label l) {
        if (l >= kMaxLabels) throw InputError("label index out of range: " + std::to_string(l));
        bits_ |= std::uint64_t{1} << l;
    }

    constexpr bool contains(Label l) const { return l < kMaxLabels && ((bits_ >> l) & 1U) != 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool is_subset_of(LabelSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr bool is_strict_subset_of(LabelSet other) const { return is_subset_of(other) && bits_ != other.bits_; }
    constexpr std::uint64_t bits() const { return bits_; }

    constexpr LabelSet operator|(LabelSet o) const { return LabelSet(bits_ | o.bits_); }
    constexpr LabelSet operator&(LabelSet o) const { return LabelSet(bits_ & o.bits_); }
    constexpr LabelSet& operator|=(LabelSet o) {
        bits_ |= o.bits_;
        return *this;
    }

    /// Complement within an alphabet of size k.
    constexpr LabelSet complement(std::size_t k) const { return LabelSet(~bits_ & all(k).bits_); }

    /// Members in ascending order.
    std::vector<Label> labels() const {
        std::vector<Label> out;
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<Label>(std::countr_zero(b)));
        return out;
    }

    friend constexpr bool operator==(LabelSet, LabelSet) = default;

    /// Lexicographic order on the ascending member lists.
    friend bool operator<(LabelSet a, LabelSet b) {
        auto la = a.labels();
        auto lb = b.labels();
        return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end());
    }

private:
    constexpr explicit LabelSet(std::uint64_t bits) : bits_(bits) {}
    std::uint64_t bits_ = 0;
};

/// Ordered, distinct display names of the discrete outputs.
class OutputAlphabet {
public:
    OutputAlphabet() = default;

    explicit OutputAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.size() < 2) throw InputError("output alphabet needs at least two labels");
        if (labels_.size() > LabelSet::kMaxLabels)
            throw InputError("output alphabet larger than " + std::to_string(LabelSet::kMaxLabels) + " labels");
        std::set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size()) throw InputError("output alphabet labels must be unique");
    }

    /// {"+", "-", "0"}, the alphabet of sign-discretized outputs.
    static OutputAlphabet sign() { return OutputAlphabet({"+", "-", "0"}); }

    std::size_t size() const { return labels_.size(); }
    const std::string& name(Label l) const { return labels_.at(l); }
    const std::vector<std::string>& names() const { return labels_; }
    LabelSet all() const { return LabelSet::all(labels_.size()); }

    std::optional<Label> find(std::string_view name) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == name) return i;
        return std::nullopt;
    }

    Label at(std::string_view name) const {
        if (auto l = find(name)) return *l;
        throw InputError("unknown output label '" + std::string(name) + "'");
    }

    std::vector<std::string> names_of(LabelSet s) const {
        std::vector<std::string> out;
        for (Label l : s.labels()) out.push_back(name(l));
        return out;
    }

    friend bool operator==(const OutputAlphabet&, const OutputAlphabet&) = default;

private:
    std::vector<std::string> labels_;
};

struct Observation {
    std::vector<double> features;
    Label output = 0;
    std::string trace_id;
    std::uint64_t step = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct ReferenceData {
    std::string name;
    std::vector<Observation> observations;

    friend bool operator==(const ReferenceData&, const ReferenceData&) = default;
};

/// Counters collected while loading logs.
struct LoadStats {
    std::size_t rows = 0;
    std::size_t dropped_non_finite = 0;
    std::size_t dropped_missing_label = 0;
    std::size_t short_traces = 0;

    friend bool operator==(const LoadStats&, const LoadStats&) = default;
};

/// Observations D_1..D_q of q references over a shared feature space.
class ObservationSet {
public:
    ObservationSet() = default;

    ObservationSet(std::vector<std::string> feature_names, OutputAlphabet alphabet)
        : feature_names_(std::move(feature_names)), alphabet_(std::move(alphabet)) {
        if (feature_names_.empty()) throw InputError("observation set needs at least one feature");
        min_.assign(feature_names_.size(), std::numeric_limits<double>::infinity());
        max_.assign(feature_names_.size(), -std::numeric_limits<double>::infinity());
    }

    /// Returns the index of the reference, creating it when new.
    std::size_t reference(const std::string& name) {
        for (std::size_t j = 0; j < refs_.size(); ++j)
            if (refs_[j].name == name) return j;
        refs_.push_back({name, {}});
        return refs_.size() - 1;
    }

    void add(std::size_t ref, Observation obs) {
        if (ref >= refs_.size()) throw InputError("unknown reference index " + std::to_string(ref));
        if (obs.features.size() != dims())
            throw InputError("observation has " + std::to_string(obs.features.size()) + " features, expected " +
                             std::to_string(dims()));
        for (double v : obs.features)
            if (!std::isfinite(v)) throw InputError("observation feature is not finite");
        if (obs.output >= alphabet_.size()) throw InputError("observation label outside the alphabet");
        for (std::size_t i = 0; i < dims(); ++i) {
            min_[i] = std::min(min_[i], obs.features[i]);
            max_[i] = std::max(max_[i], obs.features[i]);
        }
        refs_[ref].observations.push_back(std::move(obs));
    }

    std::size_t dims() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const OutputAlphabet& alphabet() const { return alphabet_; }
    const std::vector<ReferenceData>& references() const { return refs_; }
    std::size_t reference_count() const { return refs_.size(); }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& r : refs_) n += r.observations.size();
        return n;
    }

    bool empty() const { return size() == 0; }

    /// Observed per-dimension minimum; +inf when empty.
    const std::vector<double>& observed_min() const { return min_; }
    const std::vector<double>& observed_max() const { return max_; }

    LoadStats& stats() { return stats_; }
    const LoadStats& stats() const { return stats_; }

    friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

private:
    std::vector<std::string> feature_names_;
    OutputAlphabet alphabet_;
    std::vector<ReferenceData> refs_;
    std::vector<double> min_;
    std::vector<double> max_;
    LoadStats stats_;
};

/// Integer cell coordinates on the grid, ordered lexicographically.
struct RegionIndex {
    std::vector<std::int32_t> idx;

    std::size_t size() const { return idx.size(); }
    std::int32_t operator[](std::size_t i) const { return idx[i]; }

    friend bool operator==(const RegionIndex&, const RegionIndex&) = default;
    friend auto operator<=>(const RegionIndex& a, const RegionIndex& b) { return a.idx <=> b.idx; }
};

struct RegionIndexHash {
    std::size_t operator()(const RegionIndex& r) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::int32_t v : r.idx) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }

    friend bool operator==(const Interval&, const Interval&) = default;
    friend auto operator<=>(const Interval&, const Interval&) = default;
};

/// p equal parts per dimension over the box [lower, upper].
///
/// Cells are half-open [b_k, b_{k+1}) except the last one, which also holds the
/// upper face. Boundaries are computed as lower + (upper - lower) * k / p so the
/// cell containing a point and the cell's box never disagree.
class GridSpec {
public:
    GridSpec() = default;

    GridSpec(std::vector<double> lower, std::vector<double> upper, std::size_t parts)
        : lower_(std::move(lower)), upper_(std::move(upper)), parts_(parts) {
        if (parts_ == 0) throw InputError("grid needs at least one part per dimension");
        if (parts_ > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
            throw InputError("grid part count too large");
        if (lower_.size() != upper_.size() || lower_.empty())
            throw InputError("grid bounds must be non-empty and of equal length");
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
                throw InputError("grid bound of dimension " + std::to_string(i) + " is not finite");
            if (!(lower_[i] < upper_[i]))
                throw InputError("degenerate grid dimension " + std::to_string(i) + ": lower bound " +
                                 std::to_string(lower_[i]) + " is not below upper bound " + std::to_string(upper_[i]));
        }
    }

    std::size_t dims() const { return lower_.size(); }
    std::size_t parts() const { return parts_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    double width(std::size_t dim) const { return (upper_[dim] - lower_[dim]) / static_cast<double>(parts_); }

    /// k-th cell boundary of a dimension, k in [0, p].
    double boundary(std::size_t dim, std::int64_t k) const {
        if (k <= 0) return lower_[dim];
        if (static_cast<std::size_t>(k) >= parts_) return upper_[dim];
        return lower_[dim] + (upper_[dim] - lower_[dim]) * static_cast<double>(k) / static_cast<double>(parts_);
    }

    std::optional<std::int32_t> cell_along(std::size_t dim, double x) const {
        if (!(x >= lower_[dim] && x <= upper_[dim])) return std::nullopt;
        const auto last = static_cast<std::int64_t>(parts_) - 1;
        auto k = static_cast<std::int64_t>(std::floor((x - lower_[dim]) / width(dim)));
        k = std::clamp<std::int64_t>(k, 0, last);
        while (k > 0 && x < boundary(dim, k)) --k;
        while (k < last && x >= boundary(dim, k + 1)) ++k;
        return static_cast<std::int32_t>(k);
    }

    /// Cell holding x, or nullopt when x lies outside the grid box.
    std::optional<RegionIndex> cell_of(std::span<const double> x) const {
        if (x.size() != dims()) throw InputError("point dimension does not match grid");
        RegionIndex r;
        r.idx.resize(dims());
        for (std::size_t i = 0; i < dims(); ++i) {
            auto k = cell_along(i, x[i]);
            if (!k) return std::nullopt;
            r.idx[i] = *k;
        }
        return r;
    }

    Interval cell_interval(std::size_t dim, std::int32_t k) const { return {boundary(dim, k), boundary(dim, k + 1)}; }

    bool valid_index(const RegionIndex& r) const {
        if (r.size() != dims()) return false;
        return std::all_of(r.idx.begin(), r.idx.end(),
                           [&](std::int32_t v) { return v >= 0 && static_cast<std::size_t>(v) < parts_; });
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::size_t parts_ = 0;
};

/// One grid cell with its per-reference tallies.
struct RegionEntry {
    RegionIndex index;
    std::vector<std::size_t> counts;         // per reference
    std::vector<LabelSet> per_ref_outputs;   // Y_{X,j}
    LabelSet combined;                       // Y_X

    friend bool operator==(const RegionEntry&, const RegionEntry&) = default;
};

/// Sparse region table sorted by RegionIndex. After `interesting` this is the
/// interesting-region table (Gamma_X with Gamma_y attached).
struct RegionTable {
    GridSpec grid;
    std::size_t references = 0;
    std::vector<RegionEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    friend bool operator==(const RegionTable&, const RegionTable&) = default;
};

using InterestingRegionTable = RegionTable;

/// One interval per feature; nullopt marks a free (unconstrained) dimension.
using Precondition = std::vector<std::optional<Interval>>;

struct Specification {
    Precondition precondition;
    LabelSet postcondition;
    LabelSet omega;
    std::vector<RegionIndex> members;

    /// Closed-interval membership over the constrained dimensions.
    bool accepts(std::span<const double> x) const {
        for (std::size_t i = 0; i < precondition.size(); ++i)
            if (precondition[i] && !precondition[i]->contains(x[i])) return false;
        return true;
    }

    std::size_t eta() const { return postcondition.size(); }

    friend bool operator==(const Specification&, const Specification&) = default;
};

enum class ClusterMetric { chebyshev, euclidean };
enum class Discretizer { identity, sign };

struct MinerConfig {
    double tau_cov = 1.0;
    double tau_rep = 0.01;
    std::size_t tau_max = 2;
    std::size_t parts = 50;
    double importance_fraction = 1e-4;
    std::size_t importance_min_count = 2;
    ClusterMetric cluster_metric = ClusterMetric::chebyshev;
    std::optional<double> cluster_radius_override;
    std::size_t history = 1;
    Discretizer discretizer = Discretizer::identity;
    double sign_deadband = 0.0;
    std::optional<std::vector<double>> grid_lower;
    std::optional<std::vector<double>> grid_upper;

    friend bool operator==(const MinerConfig&, const MinerConfig&) = default;
};

/// Returns the config when every field is in range; throws ConfigError naming
/// the first offending field otherwise.
inline MinerConfig validate_config(const MinerConfig& c, const OutputAlphabet& alphabet) {
    auto in_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; };
    if (!in_unit(c.tau_cov)) throw ConfigError("tau_cov", "must lie in (0, 1]");
    if (!in_unit(c.tau_rep)) throw ConfigError("tau_rep", "must lie in (0, 1]");
    if (c.tau_max < 1) throw ConfigError("tau_max", "must be at least 1");
    if (c.tau_max >= alphabet.size())
        throw ConfigError("tau_max", "must be below the alphabet size " + std::to_string(alphabet.size()));
    if (c.parts == 0) throw ConfigError("parts", "must be positive");
    if (!std::isfinite(c.importance_fraction) || c.importance_fraction < 0.0 || c.importance_fraction > 1.0)
        throw ConfigError("importance_fraction", "must lie in [0, 1]");
    if (c.importance_min_count < 1) throw ConfigError("importance_min_count", "must be at least 1");
    if (c.cluster_radius_override && !(std::isfinite(*c.cluster_radius_override) && *c.cluster_radius_override > 0.0))
        throw ConfigError("cluster_radius_override", "must be a positive real");
    if (c.history < 1) throw ConfigError("history", "must be at least 1");
    if (!std::isfinite(c.sign_deadband) || c.sign_deadband < 0.0) throw ConfigError("sign_deadband", "must be >= 0");
    if (c.grid_lower.has_value() != c.grid_upper.has_value())
        throw ConfigError("grid_lower", "grid_lower and grid_upper must be given together");
    if (c.grid_lower && c.grid_lower->size() != c.grid_upper->size())
        throw ConfigError("grid_upper", "must have as many entries as grid_lower");
    return c;
}

/// Bookkeeping recorded by the miner alongside the specifications.
struct MiningSummary {
    std::size_t interesting_regions = 0;
    std::size_t min_samples = 0;
    double radius = 0.0;
    std::size_t omegas_visited = 0;
    std::size_t omegas_total = 0;
    bool coverage_reached = false;
    std::optional<double> relaxed_coverage;
    std::size_t out_of_grid = 0;
    std::size_t clusters_below_min_samples = 0;
    std::size_t duplicates_dropped = 0;

    friend bool operator==(const MiningSummary&, const MiningSummary&) = default;
};

/// The conjunctive set Psi together with everything needed to interpret it.
struct SpecificationSet {
    std::vector<std::string> feature_names;
    std::string output_name = "output";
    OutputAlphabet alphabet;
    GridSpec grid;
    MinerConfig config;
    std::vector<Specification> specs;
    MiningSummary summary;

    std::size_t dims() const { return feature_names.size(); }
    std::size_t size() const { return specs.size(); }
    bool empty() const { return specs.empty(); }

    friend bool operator==(const SpecificationSet&, const SpecificationSet&) = default;
};

/// Tightest grid-aligned box around the member cells.
inline Precondition bounding_box(const GridSpec& grid, std::span<const RegionIndex> members) {
    Precondition pre(grid.dims());
    if (members.empty()) return pre;
    for (std::size_t i = 0; i < grid.dims(); ++i) {
        std::int32_t lo = members.front()[i];
        std::int32_t hi = lo;
        for (const auto& m : members) {
            lo = std::min(lo, m[i]);
            hi = std::max(hi, m[i]);
        }
        pre[i] = Interval{grid.boundary(i, lo), grid.boundary(i, static_cast<std::int64_t>(hi) + 1)};
    }
    return pre;
}

/// Checks the structural invariants of a specification set. Returns one
/// message per violation; empty means valid.
inline std::vector<std::string> check_invariants(const SpecificationSet& set) {
    std::vector<std::string> bad;
    auto where = [](std::size_t s) { return "spec " + std::to_string(s + 1) + ": "; };
    if (set.grid.dims() != set.dims()) bad.push_back("grid dimension differs from feature count");
    std::set<std::pair<Precondition, std::uint64_t>> seen;
    for (std::size_t s = 0; s < set.specs.size(); ++s) {
        const auto& spec = set.specs[s];
        if (spec.precondition.size() != set.dims()) {
            bad.push_back(where(s) + "precondition has wrong dimension");
            continue;
        }
        for (std::size_t i = 0; i < spec.precondition.size(); ++i) {
            const auto& iv = spec.precondition[i];
            if (iv && !(std::isfinite(iv->lo) && std::isfinite(iv->hi) && iv->lo <= iv->hi))
                bad.push_back(where(s) + "interval " + std::to_string(i) + " is malformed");
        }
        if (!spec.postcondition.is_subset_of(set.alphabet.all()))
            bad.push_back(where(s) + "postcondition outside the alphabet");
        if (!spec.postcondition.is_subset_of(spec.omega)) bad.push_back(where(s) + "postcondition not within omega");
        if (spec.eta() < 1 || spec.eta() > set.config.tau_max)
            bad.push_back(where(s) + "postcondition size " + std::to_string(spec.eta()) + " outside [1, tau_max]");
        if (!seen.emplace(spec.precondition, spec.postcondition.bits()).second)
            bad.push_back(where(s) + "duplicates an earlier specification");
        if (!spec.members.empty()) {
            bool members_ok = true;
            for (const auto& m : spec.members)
                if (!set.grid.valid_index(m)) members_ok = false;
            if (!members_ok) {
                bad.push_back(where(s) + "member index outside the grid");
            } else if (bounding_box(set.grid, spec.members) != spec.precondition) {
                bad.push_back(where(s) + "precondition is not the bounding box of its members");
            }
        }
    }
    return bad;
}

/// Per-reference metric counts. Ratios are undefined when the denominator is 0.
struct ReferenceMetrics {
    std::string reference;
    std::size_t observations = 0;
    std::size_t covered = 0;
    std::size_t satisfying = 0;

    std::optional<double> support() const {
        if (observations == 0) return std::nullopt;
        return static_cast<double>(covered) / static_cast<double>(observations);
    }
    std::optional<double> confidence() const {
        if (covered == 0) return std::nullopt;
        return static_cast<double>(satisfying) / static_cast<double>(covered);
    }

    friend bool operator==(const ReferenceMetrics&, const ReferenceMetrics&) = default;
};

struct EvalReport {
    std::vector<ReferenceMetrics> references;
    std::size_t total_observations = 0;
    std::size_t covered_observations = 0;
    std::size_t satisfying_observations = 0;
    std::optional<double> coverage;                   // relaxed, needs a region table
    std::vector<std::optional<double>> representation; // relaxed, per spec
    double volume = 0.0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

} // namespace spectra
