#pragma once

// Reference log loading: delimited text or JSON lines, per-column affine
// normalization, lag expansion over a history window, and output
// discretization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectra/core_model.hpp"
#include "spectra/serialization.hpp"

namespace spectra {

/// x' = (x + offset) * scale
struct AffineTransform {
    double scale = 1.0;
    double offset = 0.0;

    double apply(double x) const { return (x + offset) * scale; }
    double invert(double y) const { return y / scale - offset; }

    friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// How the output column becomes a label.
struct OutputSpec {
    enum class Kind { labels, sign };
    Kind kind = Kind::labels;
    std::vector<std::string> labels;
    double deadband = 0.0;

    OutputAlphabet alphabet() const {
        return kind == Kind::sign ? OutputAlphabet::sign() : OutputAlphabet(labels);
    }
};

struct LogSchema {
    std::vector<std::string> feature_columns;
    std::string output_column;
    std::string trace_column = "trace";
    std::optional<std::string> step_column;
    std::optional<std::string> reference_column;
    std::map<std::string, AffineTransform> transforms;
    std::size_t history = 1;
    std::vector<std::string> history_columns;
    std::map<std::string, std::string> display_names;
    std::string output_name;
    OutputSpec output;
    char delimiter = 0; // 0: detect from the header line

    bool is_history_column(const std::string& c) const {
        return std::find(history_columns.begin(), history_columns.end(), c) != history_columns.end();
    }

    AffineTransform transform(const std::string& column) const {
        auto it = transforms.find(column);
        return it == transforms.end() ? AffineTransform{} : it->second;
    }

    std::string display(const std::string& column) const {
        auto it = display_names.find(column);
        return it == display_names.end() ? column : it->second;
    }

    /// Names of the windowed feature vector: plain columns keep their name,
    /// history columns expand to NAME[-1] .. NAME[-h] (most recent first).
    std::vector<std::string> feature_names() const {
        std::vector<std::string> names;
        for (const auto& c : feature_columns) {
            if (is_history_column(c)) {
                for (std::size_t lag = 1; lag <= history; ++lag)
                    names.push_back(display(c) + "[-" + std::to_string(lag) + "]");
            } else {
                names.push_back(display(c));
            }
        }
        return names;
    }

    /// Transform of every windowed feature, aligned with feature_names().
    std::vector<AffineTransform> feature_transforms() const {
        std::vector<AffineTransform> out;
        for (const auto& c : feature_columns)
            out.insert(out.end(), is_history_column(c) ? history : 1, transform(c));
        return out;
    }

    std::string output_display() const { return output_name.empty() ? display(output_column) : output_name; }

    void validate() const {
        if (feature_columns.empty()) throw InputError("schema lists no feature columns");
        if (output_column.empty()) throw InputError("schema names no output column");
        if (history < 1) throw InputError("schema history must be at least 1");
        for (const auto& c : history_columns)
            if (std::find(feature_columns.begin(), feature_columns.end(), c) == feature_columns.end())
                throw InputError("history column '" + c + "' is not a feature column");
        for (const auto& [col, t] : transforms) {
            if (t.scale == 0.0 || !std::isfinite(t.scale) || !std::isfinite(t.offset))
                throw InputError("transform of column '" + col + "' needs a finite non-zero scale");
        }
        if (output.kind == OutputSpec::Kind::labels) (void)output.alphabet();
        if (!(output.deadband >= 0.0)) throw InputError("sign deadband must be >= 0");
    }
};

inline LogSchema schema_from_json(const json& j) {
    LogSchema s;
    try {
        s.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
        s.output_column = j.at("output_column").get<std::string>();
        s.trace_column = j.value("trace_column", std::string("trace"));
        if (j.contains("step_column") && !j.at("step_column").is_null())
            s.step_column = j.at("step_column").get<std::string>();
        if (j.contains("reference_column") && !j.at("reference_column").is_null())
            s.reference_column = j.at("reference_column").get<std::string>();
        s.history = j.value("history", std::size_t{1});
        s.history_columns = j.value("history_columns", std::vector<std::string>{});
        if (j.contains("transforms")) {
            for (auto it = j.at("transforms").begin(); it != j.at("transforms").end(); ++it)
                s.transforms[it.key()] = {it.value().value("scale", 1.0), it.value().value("offset", 0.0)};
        }
        if (j.contains("display_names"))
            s.display_names = j.at("display_names").get<std::map<std::string, std::string>>();
        s.output_name = j.value("output_name", std::string());
        const json& out = j.at("output");
        if (out.contains("discretizer")) {
            auto d = out.at("discretizer").get<std::string>();
            if (d != "sign") throw InputError("unknown output discretizer '" + d + "'");
            s.output.kind = OutputSpec::Kind::sign;
            s.output.deadband = out.value("deadband", 0.0);
        } else {
            s.output.kind = OutputSpec::Kind::labels;
            s.output.labels = out.at("labels").get<std::vector<std::string>>();
        }
        if (j.contains("delimiter")) {
            auto d = j.at("delimiter").get<std::string>();
            if (d == "\\t" || d == "tab") s.delimiter = '\t';
            else if (d.size() == 1) s.delimiter = d[0];
            else throw InputError("delimiter must be a single character");
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed log schema: ") + e.what());
    }
    s.validate();
    return s;
}

inline LogSchema load_schema(const std::string& path) { return schema_from_json(read_json_file(path)); }

/// '+' if value > deadband, '-' if value < -deadband, else '0'; returned as
/// an index into OutputAlphabet::sign().
inline Label discretize_sign(double value, double deadband = 0.0) {
    if (!std::isfinite(value)) throw InputError("cannot discretize a non-finite output value");
    if (value > deadband) return 0;
    if (value < -deadband) return 1;
    return 2;
}

inline std::vector<double> apply_affine(std::span<const double> features, std::span<const AffineTransform> t) {
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) out[i] = t[i].apply(features[i]);
    return out;
}

inline std::vector<double> invert_affine(std::span<const double> features, std::span<const AffineTransform> t) {
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) out[i] = t[i].invert(features[i]);
    return out;
}

/// Lag-expands one time-ordered trace. `rows` hold raw values in
/// schema.feature_columns order. Emits one vector per row t >= h-1; lag j of a
/// history column equals the raw value at row t-j+1.
inline std::vector<std::vector<double>> window_history(std::span<const std::vector<double>> rows,
                                                       const LogSchema& schema) {
    const std::size_t h = schema.history;
    std::vector<std::vector<double>> out;
    if (rows.size() < h) return out;
    std::vector<bool> lagged;
    for (const auto& c : schema.feature_columns) lagged.push_back(schema.is_history_column(c));
    out.reserve(rows.size() - h + 1);
    for (std::size_t t = h - 1; t < rows.size(); ++t) {
        std::vector<double> v;
        for (std::size_t c = 0; c < lagged.size(); ++c) {
            if (lagged[c]) {
                for (std::size_t lag = 1; lag <= h; ++lag) v.push_back(rows[t - lag + 1][c]);
            } else {
                v.push_back(rows[t][c]);
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

namespace detail {

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // 1-based source line of each row
};

inline std::vector<std::string> split_line(std::string_view line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        auto cell = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"' || cell.back() == '\r')) cell.remove_suffix(1);
        cells.emplace_back(cell);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

inline RawTable read_delimited(const std::string& path, char delim) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open log " + path);
    RawTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            if (delim == 0) delim = (line.find('\t') != std::string::npos && line.find(',') == std::string::npos) ? '\t' : ',';
            t.header = split_line(line, delim);
            continue;
        }
        auto cells = split_line(line, delim);
        if (cells.size() != t.header.size())
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                             " cells, found " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lineno);
    }
    if (t.header.empty()) throw InputError("log " + path + " has no header");
    return t;
}

inline RawTable read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open log " + path);
    RawTable t;
    std::map<std::string, std::size_t> column;
    std::string line;
    std::size_t lineno = 0;
    std::vector<json> objects;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = parse_json_text(line, path + ":" + std::to_string(lineno));
        if (!j.is_object()) throw InputError(path + ":" + std::to_string(lineno) + ": expected a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it)
            if (column.emplace(it.key(), column.size()).second) t.header.push_back(it.key());
        objects.push_back(std::move(j));
        lines.push_back(lineno);
    }
    for (std::size_t r = 0; r < objects.size(); ++r) {
        std::vector<std::string> cells(t.header.size());
        for (auto it = objects[r].begin(); it != objects[r].end(); ++it) {
            const json& v = it.value();
            std::string& cell = cells[column[it.key()]];
            if (v.is_string()) cell = v.get<std::string>();
            else if (v.is_number_float()) cell = format_double(v.get<double>());
            else if (v.is_null()) cell.clear();
            else cell = v.dump();
        }
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lines[r]);
    }
    return t;
}

inline std::size_t column_index(const RawTable& t, const std::string& name, const std::string& path) {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw InputError("log " + path + " has no column '" + name + "'");
    return static_cast<std::size_t>(it - t.header.begin());
}

/// Parses a numeric cell; empty cells read as NaN (dropped later).
inline double parse_number(const std::string& cell, const std::string& path, std::size_t line, const std::string& col) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw InputError(path + ":" + std::to_string(line) + ": column '" + col + "': cannot parse '" + cell +
                         "' as a number");
    return v;
}

/// Matches a label cell against the alphabet by name, falling back to numeric
/// equality ("300" vs "300.0").
inline std::optional<Label> match_label(const OutputAlphabet& a, const std::string& cell) {
    if (auto l = a.find(cell)) return l;
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size()) return std::nullopt;
    for (Label i = 0; i < a.size(); ++i) {
        const auto& n = a.name(i);
        double w = 0.0;
        auto [q, ec2] = std::from_chars(n.data(), n.data() + n.size(), w);
        if (ec2 == std::errc() && q == n.data() + n.size() && w == v) return i;
    }
    return std::nullopt;
}

} // namespace detail

/// Loads reference logs into an ObservationSet. Files are processed in sorted
/// path order. The reference of a row is the schema's reference column when
/// present, otherwise the file stem. An empty result is an error unless
/// `allow_empty` is set.
inline ObservationSet load_logs(std::vector<std::string> paths, const LogSchema& schema, bool allow_empty = false) {
    schema.validate();
    std::sort(paths.begin(), paths.end());
    const OutputAlphabet alphabet = schema.output.alphabet();
    ObservationSet set(schema.feature_names(), alphabet);
    std::vector<AffineTransform> transforms;
    for (const auto& c : schema.feature_columns) transforms.push_back(schema.transform(c));

    for (const auto& path : paths) {
        const bool jsonl = std::filesystem::path(path).extension() == ".jsonl";
        detail::RawTable t = jsonl ? detail::read_jsonl(path) : detail::read_delimited(path, schema.delimiter);
        std::vector<std::size_t> fcols;
        for (const auto& c : schema.feature_columns) fcols.push_back(detail::column_index(t, c, path));
        const std::size_t ocol = detail::column_index(t, schema.output_column, path);
        const std::size_t tcol = detail::column_index(t, schema.trace_column, path);
        std::optional<std::size_t> scol, rcol;
        if (schema.step_column) scol = detail::column_index(t, *schema.step_column, path);
        if (schema.reference_column) rcol = detail::column_index(t, *schema.reference_column, path);
        const std::string stem = std::filesystem::path(path).stem().string();

        struct Row {
            std::uint64_t step;
            std::vector<double> values;
            std::optional<Label> label;
        };
        // (reference, trace) groups in order of first appearance.
        std::vector<std::pair<std::string, std::string>> order;
        std::map<std::pair<std::string, std::string>, std::vector<Row>> groups;

        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& cells = t.rows[r];
            const std::size_t line = t.lines[r];
            Row row;
            row.step = r;
            if (scol) {
                double s = detail::parse_number(cells[*scol], path, line, *schema.step_column);
                if (!(s >= 0.0) || !std::isfinite(s))
                    throw InputError(path + ":" + std::to_string(line) + ": step must be a non-negative number");
                row.step = static_cast<std::uint64_t>(s);
            }
            for (std::size_t c = 0; c < fcols.size(); ++c)
                row.values.push_back(
                    transforms[c].apply(detail::parse_number(cells[fcols[c]], path, line, schema.feature_columns[c])));
            const std::string& out = cells[ocol];
            if (!out.empty()) {
                if (schema.output.kind == OutputSpec::Kind::sign) {
                    double v = detail::parse_number(out, path, line, schema.output_column);
                    if (std::isfinite(v)) row.label = discretize_sign(v, schema.output.deadband);
                } else {
                    row.label = detail::match_label(alphabet, out);
                    if (!row.label)
                        throw InputError(path + ":" + std::to_string(line) + ": column '" + schema.output_column +
                                         "': label '" + out + "' is not in the output alphabet");
                }
            }
            auto key = std::make_pair(rcol ? cells[*rcol] : stem, cells[tcol]);
            auto [it, fresh] = groups.try_emplace(key);
            if (fresh) order.push_back(key);
            it->second.push_back(std::move(row));
        }

        for (const auto& key : order) {
            auto& rows = groups[key];
            std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.step < b.step; });
            set.stats().rows += rows.size();
            std::vector<std::vector<double>> raw;
            raw.reserve(rows.size());
            for (const auto& r : rows) raw.push_back(r.values);
            auto windows = window_history(raw, schema);
            if (rows.size() < schema.history) ++set.stats().short_traces;
            const std::size_t ref = set.reference(key.first);
            for (std::size_t w = 0; w < windows.size(); ++w) {
                const Row& row = rows[w + schema.history - 1];
                if (!row.label) {
                    ++set.stats().dropped_missing_label;
                    continue;
                }
                if (!std::all_of(windows[w].begin(), windows[w].end(), [](double v) { return std::isfinite(v); })) {
                    ++set.stats().dropped_non_finite;
                    continue;
                }
                set.add(ref, Observation{std::move(windows[w]), *row.label, key.second, row.step});
            }
        }
    }
    if (set.empty() && !allow_empty) throw InputError("no usable observations in the given logs");
    return set;
}

} // namespace spectra
