#pragma once

// Canonical JSON interchange for SpecificationSet, MinerConfig and EvalReport.
// Keys are sorted, floating point numbers carry 17 significant digits, and
// arrays keep the in-memory order, so equal values always serialize to equal
// bytes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spectra/core_model.hpp"

namespace spectra {

using json = nlohmann::json;

namespace detail {

inline std::string format_double(double v) {
    if (!std::isfinite(v)) throw Error("cannot serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void dump_canonical(const json& j, std::string& out, int depth) {
    auto newline = [&](int d) {
        out += '\n';
        out.append(static_cast<std::size_t>(d) * 2, ' ');
    };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            break;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // std::map: sorted keys
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            out += json(it.key()).dump();
            out += ": ";
            dump_canonical(it.value(), out, depth + 1);
        }
        newline(depth);
        out += '}';
        break;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            break;
        }
        bool scalars = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) out += scalars ? ", " : ",";
            if (!scalars) newline(depth + 1);
            dump_canonical(j[i], out, depth + 1);
        }
        if (!scalars) newline(depth);
        out += ']';
        break;
    }
    case json::value_t::number_float:
        out += format_double(j.get<double>());
        break;
    default:
        out += j.dump();
        break;
    }
}

inline json interval_json(const std::optional<Interval>& iv) {
    if (!iv) return nullptr;
    return json{{"lo", iv->lo}, {"hi", iv->hi}};
}

inline std::vector<std::string> label_names(const OutputAlphabet& a, LabelSet s) { return a.names_of(s); }

inline LabelSet label_set_from(const OutputAlphabet& a, const json& j) {
    LabelSet s;
    for (const auto& name : j) s.insert(a.at(name.get<std::string>()));
    return s;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    return json(*v);
}

inline std::optional<double> optional_double(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace detail

/// Serializes with sorted keys, two-space indentation and %.17g numbers.
inline std::string canonical_dump(const json& j) {
    std::string out;
    detail::dump_canonical(j, out, 0);
    out += '\n';
    return out;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(what + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

inline const char* to_string(ClusterMetric m) { return m == ClusterMetric::chebyshev ? "chebyshev" : "euclidean"; }
inline const char* to_string(Discretizer d) { return d == Discretizer::identity ? "identity" : "sign"; }

inline json to_json(const MinerConfig& c) {
    json j;
    j["tau_cov"] = c.tau_cov;
    j["tau_rep"] = c.tau_rep;
    j["tau_max"] = c.tau_max;
    j["parts"] = c.parts;
    j["importance_fraction"] = c.importance_fraction;
    j["importance_min_count"] = c.importance_min_count;
    j["cluster_metric"] = to_string(c.cluster_metric);
    j["cluster_radius_override"] = detail::optional_json(c.cluster_radius_override);
    j["history"] = c.history;
    j["discretizer"] = to_string(c.discretizer);
    j["sign_deadband"] = c.sign_deadband;
    j["grid_lower"] = detail::optional_json(c.grid_lower);
    j["grid_upper"] = detail::optional_json(c.grid_upper);
    return j;
}

/// Reads the fields present in j on top of `base`; unknown keys are rejected.
inline MinerConfig config_from_json(const json& j, MinerConfig base = {}) {
    if (!j.is_object()) throw InputError("miner config must be a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "tau_cov") base.tau_cov = v.get<double>();
            else if (k == "tau_rep") base.tau_rep = v.get<double>();
            else if (k == "tau_max") base.tau_max = v.get<std::size_t>();
            else if (k == "parts") base.parts = v.get<std::size_t>();
            else if (k == "importance_fraction") base.importance_fraction = v.get<double>();
            else if (k == "importance_min_count") base.importance_min_count = v.get<std::size_t>();
            else if (k == "cluster_metric") {
                auto s = v.get<std::string>();
                if (s == "chebyshev") base.cluster_metric = ClusterMetric::chebyshev;
                else if (s == "euclidean") base.cluster_metric = ClusterMetric::euclidean;
                else throw ConfigError("cluster_metric", "unknown metric '" + s + "'");
            } else if (k == "cluster_radius_override") {
                base.cluster_radius_override = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            } else if (k == "history") base.history = v.get<std::size_t>();
            else if (k == "discretizer") {
                auto s = v.get<std::string>();
                if (s == "identity") base.discretizer = Discretizer::identity;
                else if (s == "sign") base.discretizer = Discretizer::sign;
                else throw ConfigError("discretizer", "unknown discretizer '" + s + "'");
            } else if (k == "sign_deadband") base.sign_deadband = v.get<double>();
            else if (k == "grid_lower") {
                base.grid_lower = v.is_null() ? std::nullopt : std::optional(v.get<std::vector<double>>());
            } else if (k == "grid_upper") {
                base.grid_upper = v.is_null() ? std::nullopt : std::optional(v.get<std::vector<double>>());
            } else throw ConfigError(k, "unknown config key");
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed miner config: ") + e.what());
    }
    return base;
}

inline json to_json(const GridSpec& g) { return json{{"lower", g.lower()}, {"upper", g.upper()}, {"parts", g.parts()}}; }

inline GridSpec grid_from_json(const json& j) {
    return GridSpec(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>(),
                    j.at("parts").get<std::size_t>());
}

inline json to_json(const MiningSummary& s) {
    return json{{"interesting_regions", s.interesting_regions},
                {"min_samples", s.min_samples},
                {"radius", s.radius},
                {"omegas_visited", s.omegas_visited},
                {"omegas_total", s.omegas_total},
                {"coverage_reached", s.coverage_reached},
                {"relaxed_coverage", detail::optional_json(s.relaxed_coverage)},
                {"out_of_grid", s.out_of_grid},
                {"clusters_below_min_samples", s.clusters_below_min_samples},
                {"duplicates_dropped", s.duplicates_dropped}};
}

inline MiningSummary summary_from_json(const json& j) {
    MiningSummary s;
    s.interesting_regions = j.value("interesting_regions", std::size_t{0});
    s.min_samples = j.value("min_samples", std::size_t{0});
    s.radius = j.value("radius", 0.0);
    s.omegas_visited = j.value("omegas_visited", std::size_t{0});
    s.omegas_total = j.value("omegas_total", std::size_t{0});
    s.coverage_reached = j.value("coverage_reached", false);
    s.relaxed_coverage = detail::optional_double(j, "relaxed_coverage");
    s.out_of_grid = j.value("out_of_grid", std::size_t{0});
    s.clusters_below_min_samples = j.value("clusters_below_min_samples", std::size_t{0});
    s.duplicates_dropped = j.value("duplicates_dropped", std::size_t{0});
    return s;
}

inline json to_json(const Specification& s, const OutputAlphabet& a) {
    json pre = json::array();
    for (const auto& iv : s.precondition) pre.push_back(detail::interval_json(iv));
    json members = json::array();
    for (const auto& m : s.members) members.push_back(m.idx);
    return json{{"precondition", pre},
                {"postcondition", detail::label_names(a, s.postcondition)},
                {"omega", detail::label_names(a, s.omega)},
                {"members", members}};
}

inline Specification specification_from_json(const json& j, const OutputAlphabet& a) {
    Specification s;
    for (const auto& iv : j.at("precondition")) {
        if (iv.is_null()) s.precondition.emplace_back(std::nullopt);
        else s.precondition.emplace_back(Interval{iv.at("lo").get<double>(), iv.at("hi").get<double>()});
    }
    s.postcondition = detail::label_set_from(a, j.at("postcondition"));
    s.omega = j.contains("omega") ? detail::label_set_from(a, j.at("omega")) : s.postcondition;
    if (j.contains("members"))
        for (const auto& m : j.at("members")) s.members.push_back(RegionIndex{m.get<std::vector<std::int32_t>>()});
    return s;
}

inline json to_json(const SpecificationSet& set) {
    json specs = json::array();
    for (const auto& s : set.specs) specs.push_back(to_json(s, set.alphabet));
    return json{{"format", "spectra-specification-set/1"},
                {"feature_names", set.feature_names},
                {"output_name", set.output_name},
                {"alphabet", set.alphabet.names()},
                {"grid", to_json(set.grid)},
                {"config", to_json(set.config)},
                {"summary", to_json(set.summary)},
                {"specs", specs}};
}

inline SpecificationSet specification_set_from_json(const json& j) {
    try {
        SpecificationSet set;
        set.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        set.output_name = j.value("output_name", std::string("output"));
        set.alphabet = OutputAlphabet(j.at("alphabet").get<std::vector<std::string>>());
        set.grid = grid_from_json(j.at("grid"));
        set.config = config_from_json(j.value("config", json::object()));
        if (j.contains("summary")) set.summary = summary_from_json(j.at("summary"));
        for (const auto& s : j.at("specs")) set.specs.push_back(specification_from_json(s, set.alphabet));
        return set;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed specification set: ") + e.what());
    }
}

inline std::string save_specification_set(const SpecificationSet& set) { return canonical_dump(to_json(set)); }

inline SpecificationSet load_specification_set(const std::string& path) {
    return specification_set_from_json(read_json_file(path));
}

inline json to_json(const EvalReport& r) {
    json refs = json::array();
    for (const auto& m : r.references) {
        refs.push_back(json{{"reference", m.reference},
                            {"observations", m.observations},
                            {"covered", m.covered},
                            {"satisfying", m.satisfying},
                            {"support", detail::optional_json(m.support())},
                            {"confidence", detail::optional_json(m.confidence())}});
    }
    json rep = json::array();
    for (const auto& v : r.representation) rep.push_back(detail::optional_json(v));
    return json{{"references", refs},
                {"total_observations", r.total_observations},
                {"covered_observations", r.covered_observations},
                {"satisfying_observations", r.satisfying_observations},
                {"coverage", detail::optional_json(r.coverage)},
                {"representation", rep},
                {"volume", r.volume}};
}

inline EvalReport eval_report_from_json(const json& j) {
    EvalReport r;
    for (const auto& m : j.at("references")) {
        r.references.push_back({m.at("reference").get<std::string>(), m.at("observations").get<std::size_t>(),
                                m.at("covered").get<std::size_t>(), m.at("satisfying").get<std::size_t>()});
    }
    r.total_observations = j.at("total_observations").get<std::size_t>();
    r.covered_observations = j.at("covered_observations").get<std::size_t>();
    r.satisfying_observations = j.at("satisfying_observations").get<std::size_t>();
    r.coverage = detail::optional_double(j, "coverage");
    for (const auto& v : j.at("representation"))
        r.representation.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    r.volume = j.at("volume").get<double>();
    return r;
}

} // namespace spectra
