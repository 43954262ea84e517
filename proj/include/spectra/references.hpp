#pragma once

// Built-in observation generators: planted-rule references with known
// ground truth, and a buffer-based ABR controller driven by a chunk-level
// streaming simulator.

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "spectra/core_model.hpp"
#include "spectra/serialization.hpp"

namespace spectra {

// ---------------------------------------------------------------------------
// Planted rules

struct PlantedRule {
    std::vector<Interval> box;
    LabelSet allowed;
    int priority = 0;

    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < box.size(); ++i)
            if (!box[i].contains(x[i])) return false;
        return true;
    }
};

/// A reference whose label at x is drawn uniformly from the allowed set of
/// the highest-priority rule covering x (earliest rule wins ties). With
/// probability noise_rate the label is replaced by a uniform draw from the
/// whole alphabet. Points no rule covers fall back to the whole alphabet.
class PlantedReference {
public:
    PlantedReference(std::vector<PlantedRule> rules, std::size_t alphabet_size, double noise_rate,
                     std::uint64_t seed)
        : rules_(std::move(rules)), k_(alphabet_size), noise_(noise_rate), rng_(seed) {
        if (!(noise_rate >= 0.0 && noise_rate < 0.5)) throw InputError("noise rate must lie in [0, 0.5)");
        for (const auto& r : rules_) {
            if (r.allowed.empty() || !r.allowed.is_subset_of(LabelSet::all(k_)))
                throw InputError("planted rule has an invalid allowed set");
            for (const auto& iv : r.box)
                if (!(iv.lo <= iv.hi)) throw InputError("planted rule box is malformed");
        }
    }

    /// Highest-priority rule covering x, or nullptr.
    const PlantedRule* covering_rule(std::span<const double> x) const {
        const PlantedRule* best = nullptr;
        for (const auto& r : rules_)
            if (r.contains(x) && (!best || r.priority > best->priority)) best = &r;
        return best;
    }

    Label operator()(std::span<const double> x) {
        const PlantedRule* rule = covering_rule(x);
        const auto allowed = rule ? rule->allowed.labels() : LabelSet::all(k_).labels();
        Label out = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng_)];
        if (noise_ > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < noise_)
            out = std::uniform_int_distribution<std::size_t>(0, k_ - 1)(rng_);
        return out;
    }

private:
    std::vector<PlantedRule> rules_;
    std::size_t k_;
    double noise_;
    std::mt19937_64 rng_;
};

struct PlantedReferenceConfig {
    std::string name;
    std::vector<PlantedRule> rules;
    double noise = 0.0;
};

/// Ground-truth experiment: a box domain, an alphabet and per-reference rules.
struct PlantedConfig {
    std::vector<std::string> feature_names;
    std::vector<double> lower;
    std::vector<double> upper;
    OutputAlphabet alphabet;
    std::vector<PlantedReferenceConfig> references;

    std::size_t dims() const { return lower.size(); }
};

inline PlantedConfig planted_config_from_json(const json& j) {
    PlantedConfig c;
    try {
        c.lower = j.at("lower").get<std::vector<double>>();
        c.upper = j.at("upper").get<std::vector<double>>();
        if (c.lower.size() != c.upper.size() || c.lower.empty())
            throw InputError("planted config bounds must be non-empty and of equal length");
        for (std::size_t i = 0; i < c.lower.size(); ++i)
            if (!(c.lower[i] < c.upper[i])) throw InputError("planted config bound " + std::to_string(i) + " is empty");
        if (j.contains("feature_names")) {
            c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        } else {
            for (std::size_t i = 0; i < c.lower.size(); ++i) c.feature_names.push_back("x" + std::to_string(i));
        }
        if (c.feature_names.size() != c.lower.size()) throw InputError("planted config feature_names has wrong length");
        c.alphabet = OutputAlphabet(j.at("alphabet").get<std::vector<std::string>>());
        for (const auto& r : j.at("references")) {
            PlantedReferenceConfig rc;
            rc.name = r.at("name").get<std::string>();
            rc.noise = r.value("noise", 0.0);
            for (const auto& rule : r.at("rules")) {
                PlantedRule pr;
                for (const auto& iv : rule.at("box"))
                    pr.box.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
                if (pr.box.size() != c.dims()) throw InputError("planted rule box has wrong dimension");
                for (const auto& name : rule.at("allowed")) pr.allowed.insert(c.alphabet.at(name.get<std::string>()));
                pr.priority = rule.value("priority", 0);
                rc.rules.push_back(std::move(pr));
            }
            c.references.push_back(std::move(rc));
        }
        if (c.references.empty()) throw InputError("planted config lists no references");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed planted config: ") + e.what());
    }
    return c;
}

/// n uniform samples per reference. Each reference draws points and labels
/// from its own stream seeded by (seed, reference position).
inline ObservationSet sample_planted(const PlantedConfig& c, std::size_t n, std::uint64_t seed) {
    ObservationSet set(c.feature_names, c.alphabet);
    for (std::size_t j = 0; j < c.references.size(); ++j) {
        const auto& rc = c.references[j];
        std::seed_seq points_seed{seed, std::uint64_t{j}, std::uint64_t{0}};
        std::seed_seq labels_seed{seed, std::uint64_t{j}, std::uint64_t{1}};
        std::mt19937_64 rng(points_seed);
        std::mt19937_64 label_rng(labels_seed);
        PlantedReference ref(rc.rules, c.alphabet.size(), rc.noise, label_rng());
        const std::size_t r = set.reference(rc.name);
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<double> x(c.dims());
            for (std::size_t i = 0; i < c.dims(); ++i)
                x[i] = std::uniform_real_distribution<double>(c.lower[i], c.upper[i])(rng);
            Label y = ref(x);
            set.add(r, Observation{std::move(x), y, "planted", s});
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// ABR

/// Pensieve bitrate ladder in kbps.
inline const std::vector<double>& pensieve_ladder() {
    static const std::vector<double> ladder{300, 750, 1200, 1850, 2850, 4300};
    return ladder;
}

/// (timestamp seconds, throughput Mbps) samples; throughput is held constant
/// between samples and the trace repeats after its last sample.
class BandwidthTrace {
public:
    BandwidthTrace() = default;

    explicit BandwidthTrace(std::vector<std::pair<double, double>> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw InputError("bandwidth trace is empty");
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!(samples_[i].second > 0.0) || !std::isfinite(samples_[i].second))
                throw InputError("bandwidth trace sample " + std::to_string(i) + " has non-positive throughput");
            if (i > 0 && !(samples_[i].first > samples_[i - 1].first))
                throw InputError("bandwidth trace timestamps must be strictly increasing");
        }
    }

    static BandwidthTrace constant(double mbps) { return BandwidthTrace({{0.0, mbps}}); }

    double throughput_at(double t) const {
        const double t0 = samples_.front().first;
        const double span = samples_.back().first - t0;
        if (span > 0.0 && t > samples_.back().first) t = t0 + std::fmod(t - t0, span);
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const std::pair<double, double>& s) { return v < s.first; });
        if (it == samples_.begin()) return samples_.front().second;
        return std::prev(it)->second;
    }

    const std::vector<std::pair<double, double>>& samples() const { return samples_; }

private:
    std::vector<std::pair<double, double>> samples_;
};

/// Two-column trace file (timestamp, Mbps), whitespace or comma separated.
/// Lines that do not start with a number (headers, comments) are skipped.
inline BandwidthTrace load_bandwidth_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace " + path);
    std::vector<std::pair<double, double>> samples;
    std::string line;
    while (std::getline(in, line)) {
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        double t = 0.0, bw = 0.0;
        if (!(ss >> t)) continue;
        if (!(ss >> bw)) throw InputError("trace " + path + ": line without a throughput value");
        samples.emplace_back(t, bw);
    }
    try {
        return BandwidthTrace(std::move(samples));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

/// Buffer-based rate choice: lowest rate up to the reservoir, highest from
/// reservoir + cushion on, and in between the ladder index
/// floor((n-1) * (buffer - reservoir) / cushion).
inline std::size_t buffer_based_abr(double buffer, double reservoir, double cushion, std::size_t ladder_size) {
    if (ladder_size == 0) throw InputError("empty bitrate ladder");
    if (!(reservoir >= 0.0 && reservoir < cushion)) throw InputError("buffer-based ABR needs 0 <= reservoir < cushion");
    if (buffer <= reservoir) return 0;
    if (buffer >= reservoir + cushion) return ladder_size - 1;
    const double pos = static_cast<double>(ladder_size - 1) * (buffer - reservoir) / cushion;
    return std::min(ladder_size - 1, static_cast<std::size_t>(std::floor(pos)));
}

struct AbrState {
    double buffer = 0.0;             // seconds of video buffered
    double last_download_time = 0.0; // seconds, most recent completed chunk
    std::size_t last_rate = 0;
};

using AbrController = std::function<std::size_t(const AbrState&)>;

struct BufferBasedController {
    double reservoir = 5.0;
    double cushion = 10.0;
    std::size_t ladder_size = 6;

    std::size_t operator()(const AbrState& s) const { return buffer_based_abr(s.buffer, reservoir, cushion, ladder_size); }
};

struct AbrSimParams {
    std::vector<double> ladder_kbps = pensieve_ladder();
    double chunk_seconds = 4.0;
    double buffer_cap = 60.0;
    std::size_t decisions = 48;
    /// Optional chunk sizes in bytes, [chunk][rate]; cycled when shorter than
    /// the horizon. Empty means bitrate * chunk_seconds.
    std::vector<std::vector<double>> chunk_bytes;
};

struct AbrLogRow {
    std::uint64_t step = 0;
    double buffer = 0.0;
    double download_time = 0.0;
    std::size_t rate = 0;

    friend bool operator==(const AbrLogRow&, const AbrLogRow&) = default;
};

/// Chunk-level streaming loop. A startup chunk is fetched at the lowest rate
/// before the first logged decision. Each logged row records the state the
/// controller saw (buffer, download time of the previous chunk) and its
/// choice. Per chunk: download_time = bits / throughput at download start,
/// buffer = max(buffer - download_time, 0) + chunk_seconds, then any excess
/// over buffer_cap is spent idling.
inline std::vector<AbrLogRow> simulate_abr(const BandwidthTrace& trace, const AbrController& controller,
                                           const AbrSimParams& params) {
    if (params.ladder_kbps.empty()) throw InputError("empty bitrate ladder");
    std::vector<AbrLogRow> rows;
    if (params.decisions == 0) return rows;
    double clock = 0.0;
    AbrState state;
    std::size_t chunk = 0;
    auto fetch = [&](std::size_t rate) {
        double bits = params.ladder_kbps[rate] * 1000.0 * params.chunk_seconds;
        if (!params.chunk_bytes.empty()) {
            const auto& sizes = params.chunk_bytes[chunk % params.chunk_bytes.size()];
            if (rate >= sizes.size()) throw InputError("chunk size table has too few rates");
            bits = sizes[rate] * 8.0;
        }
        const double mbps = trace.throughput_at(clock);
        if (!(mbps > 0.0)) throw InputError("non-positive throughput sample");
        const double dt = bits / (mbps * 1e6);
        clock += dt;
        state.buffer = std::max(state.buffer - dt, 0.0) + params.chunk_seconds;
        if (state.buffer > params.buffer_cap) {
            clock += state.buffer - params.buffer_cap;
            state.buffer = params.buffer_cap;
        }
        state.last_download_time = dt;
        state.last_rate = rate;
        ++chunk;
    };
    fetch(0);
    for (std::size_t step = 0; step < params.decisions; ++step) {
        const std::size_t rate = controller(state);
        if (rate >= params.ladder_kbps.size()) throw Error("controller chose a rate outside the ladder");
        rows.push_back({step, state.buffer, state.last_download_time, rate});
        fetch(rate);
    }
    return rows;
}

/// Writes rows in the delimited log format read by load_logs.
inline void write_abr_log(std::ostream& out, std::span<const AbrLogRow> rows, const std::string& reference,
                          const std::string& trace_id, const std::vector<double>& ladder_kbps, bool header = true) {
    if (header) out << "reference,trace,step,buffer,download_time,bitrate\n";
    for (const auto& r : rows) {
        out << reference << ',' << trace_id << ',' << r.step << ',' << detail::format_double(r.buffer) << ','
            << detail::format_double(r.download_time) << ',' << detail::format_double(ladder_kbps[r.rate]) << '\n';
    }
}

} // namespace spectra
