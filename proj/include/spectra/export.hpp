#pragma once

// Specification output: VNN-Lib counterexample queries with a manifest, a
// listing-style text report (and its parser), and a structural checker for
// the emitted VNN-Lib files.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "spectra/core_model.hpp"
#include "spectra/ingestion.hpp"
#include "spectra/serialization.hpp"

namespace spectra {

// ---------------------------------------------------------------------------
// Model interface map

/// Where each specification feature lives among the model's inputs, and the
/// range used for every input no feature maps to.
struct ModelInterfaceMap {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::map<std::string, std::vector<std::size_t>> feature_to_input;
    std::map<std::size_t, Interval> fill_ranges;

    /// Throws unless indices are in range and distinct, every feature is
    /// mapped and every unmapped input has a fill range.
    void validate(const std::vector<std::string>& features) const {
        if (inputs == 0 || outputs == 0) throw InputError("model map needs positive input and output counts");
        std::vector<bool> used(inputs, false);
        for (const auto& [name, idx] : feature_to_input) {
            if (idx.empty()) throw InputError("feature '" + name + "' maps to no input");
            for (std::size_t i : idx) {
                if (i >= inputs) throw InputError("feature '" + name + "' maps to input " + std::to_string(i) +
                                                  " but the model has " + std::to_string(inputs));
                if (used[i]) throw InputError("model input " + std::to_string(i) + " is mapped twice");
                used[i] = true;
            }
        }
        for (const auto& f : features)
            if (!feature_to_input.contains(f)) throw InputError("unmapped feature '" + f + "'");
        for (const auto& [i, iv] : fill_ranges) {
            if (i >= inputs) throw InputError("fill range for input " + std::to_string(i) + " is out of range");
            if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo <= iv.hi))
                throw InputError("fill range for input " + std::to_string(i) + " is malformed");
        }
        for (std::size_t i = 0; i < inputs; ++i)
            if (!used[i] && !fill_ranges.contains(i))
                throw InputError("model input " + std::to_string(i) + " has neither a feature nor a fill range");
    }
};

inline ModelInterfaceMap model_map_from_json(const json& j) {
    ModelInterfaceMap m;
    try {
        m.inputs = j.at("inputs").get<std::size_t>();
        m.outputs = j.at("outputs").get<std::size_t>();
        for (auto it = j.at("features").begin(); it != j.at("features").end(); ++it) {
            if (it.value().is_array()) m.feature_to_input[it.key()] = it.value().get<std::vector<std::size_t>>();
            else m.feature_to_input[it.key()] = {it.value().get<std::size_t>()};
        }
        if (j.contains("fill")) {
            for (auto it = j.at("fill").begin(); it != j.at("fill").end(); ++it) {
                const auto& r = it.value();
                std::vector<std::size_t> targets;
                const std::string& key = it.key();
                auto dash = key.find('-');
                if (dash == std::string::npos) {
                    targets.push_back(std::stoul(key));
                } else { // "a-b" inclusive range of inputs
                    for (std::size_t i = std::stoul(key.substr(0, dash)); i <= std::stoul(key.substr(dash + 1)); ++i)
                        targets.push_back(i);
                }
                for (std::size_t i : targets) m.fill_ranges[i] = {r.at(0).get<double>(), r.at(1).get<double>()};
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model map: ") + e.what());
    } catch (const std::logic_error& e) {
        throw InputError(std::string("malformed model map fill key: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// VNN-Lib

enum class QueryMode { classification, regression_sign };

inline QueryMode query_mode_from_string(const std::string& s) {
    if (s == "classification") return QueryMode::classification;
    if (s == "regression-sign" || s == "regression_sign") return QueryMode::regression_sign;
    throw InputError("unknown query mode '" + s + "' (expected classification or regression-sign)");
}

inline const char* to_string(QueryMode m) {
    return m == QueryMode::classification ? "classification" : "regression-sign";
}

namespace detail {

inline std::string vnn_number(double v) { return format_double(v); }

inline std::string describe_precondition(const SpecificationSet& set, const Specification& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.precondition.size(); ++i) {
        if (!spec.precondition[i]) continue;
        if (!out.empty()) out += ", ";
        out += set.feature_names[i] + " in [" + format_double(spec.precondition[i]->lo) + ", " +
               format_double(spec.precondition[i]->hi) + "]";
    }
    return out.empty() ? "(unconstrained)" : out;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

} // namespace detail

/// Encodes one specification as a VNN-Lib query whose satisfying assignments
/// are counterexamples: inputs inside the precondition (fill ranges for
/// unmapped inputs) and an output outside the postcondition.
///
/// Classification: a disjunction over disallowed labels c of
/// (and (>= Y_c Y_a) ...) for every allowed a. Regression-sign: bounds on Y_0
/// excluding the allowed signs, with +-epsilon as the zero band.
inline std::string export_vnnlib(const SpecificationSet& set, std::size_t spec_index, const ModelInterfaceMap& map,
                                 QueryMode mode, double epsilon = 1e-4) {
    const Specification& spec = set.specs.at(spec_index);
    map.validate(set.feature_names);
    const std::size_t k = set.alphabet.size();
    const LabelSet allowed = spec.postcondition;
    const LabelSet disallowed = allowed.complement(k);
    if (disallowed.empty())
        throw InputError("specification " + std::to_string(spec_index + 1) +
                         " allows every output; there is nothing to verify");
    if (allowed.empty()) throw InputError("specification " + std::to_string(spec_index + 1) + " allows no output");
    if (mode == QueryMode::classification && map.outputs != k)
        throw InputError("classification export needs one model output per label (" + std::to_string(k) + "), map has " +
                         std::to_string(map.outputs));
    if (mode == QueryMode::regression_sign) {
        if (map.outputs != 1) throw InputError("regression-sign export needs exactly one model output");
        if (set.alphabet != OutputAlphabet::sign()) throw InputError("regression-sign export needs the {+,-,0} alphabet");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("epsilon must be a positive real");
    }

    std::vector<std::optional<Interval>> bounds(map.inputs);
    for (std::size_t f = 0; f < set.dims(); ++f) {
        Interval iv = spec.precondition[f].value_or(Interval{set.grid.lower()[f], set.grid.upper()[f]});
        for (std::size_t i : map.feature_to_input.at(set.feature_names[f])) {
            if (!spec.precondition[f] && map.fill_ranges.contains(i)) iv = map.fill_ranges.at(i);
            bounds[i] = iv;
        }
    }
    for (std::size_t i = 0; i < map.inputs; ++i)
        if (!bounds[i]) bounds[i] = map.fill_ranges.at(i);

    std::ostringstream out;
    out << "; specification " << spec_index + 1 << " of " << set.size() << "\n";
    out << "; precondition: " << detail::describe_precondition(set, spec) << "\n";
    out << "; postcondition: " << set.output_name << " in {" << detail::join(set.alphabet.names_of(allowed), ", ")
        << "}\n";
    out << "; query: counterexample search (negated postcondition), mode " << to_string(mode) << "\n\n";
    for (std::size_t i = 0; i < map.inputs; ++i) out << "(declare-const X_" << i << " Real)\n";
    out << "\n";
    for (std::size_t j = 0; j < map.outputs; ++j) out << "(declare-const Y_" << j << " Real)\n";
    out << "\n; input bounds\n";
    for (std::size_t i = 0; i < map.inputs; ++i) {
        out << "(assert (>= X_" << i << ' ' << detail::vnn_number(bounds[i]->lo) << "))\n";
        out << "(assert (<= X_" << i << ' ' << detail::vnn_number(bounds[i]->hi) << "))\n";
    }
    out << "\n; output outside the postcondition\n";
    if (mode == QueryMode::classification) {
        out << "(assert (or\n";
        for (Label c : disallowed.labels()) {
            out << "    (and";
            for (Label a : allowed.labels()) out << " (>= Y_" << c << " Y_" << a << ')';
            out << ")\n";
        }
        out << "))\n";
    } else {
        const std::string pos = detail::vnn_number(epsilon);
        const std::string neg = detail::vnn_number(-epsilon);
        const bool plus = disallowed.contains(0), minus = disallowed.contains(1), zero = disallowed.contains(2);
        if (plus && minus && !zero) {
            out << "(assert (or (>= Y_0 " << pos << ") (<= Y_0 " << neg << ")))\n";
        } else if (zero && !plus && !minus) {
            out << "(assert (>= Y_0 " << neg << "))\n(assert (<= Y_0 " << pos << "))\n";
        } else if (plus && !minus && !zero) {
            out << "(assert (>= Y_0 " << pos << "))\n";
        } else if (minus && !plus && !zero) {
            out << "(assert (<= Y_0 " << neg << "))\n";
        } else if (plus && zero) { // allowed {-}
            out << "(assert (>= Y_0 " << neg << "))\n";
        } else { // minus && zero, allowed {+}
            out << "(assert (<= Y_0 " << pos << "))\n";
        }
    }
    return out.str();
}

struct ExportManifest {
    std::vector<std::string> files;
    json document;
};

/// Writes spec_<n>.vnnlib for every specification (n from 1) and
/// manifest.json into out_dir.
inline ExportManifest export_set(const SpecificationSet& set, const ModelInterfaceMap& map, QueryMode mode,
                                 const std::string& out_dir, double epsilon = 1e-4) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create " + out_dir + ": " + ec.message());
    ExportManifest m;
    json files = json::array();
    for (std::size_t s = 0; s < set.size(); ++s) {
        const std::string text = export_vnnlib(set, s, map, mode, epsilon);
        const std::string name = "spec_" + std::to_string(s + 1) + ".vnnlib";
        write_text_file((fs::path(out_dir) / name).string(), text);
        m.files.push_back(name);
        const auto& spec = set.specs[s];
        json pre = json::array();
        for (const auto& iv : spec.precondition) pre.push_back(detail::interval_json(iv));
        files.push_back(json{{"file", name},
                             {"spec", s + 1},
                             {"precondition", pre},
                             {"postcondition", set.alphabet.names_of(spec.postcondition)},
                             {"disallowed", set.alphabet.names_of(spec.postcondition.complement(set.alphabet.size()))},
                             {"omega", set.alphabet.names_of(spec.omega)},
                             {"members", spec.members.size()}});
    }
    m.document = json{{"format", "spectra-vnnlib-manifest/1"},
                      {"mode", to_string(mode)},
                      {"epsilon", epsilon},
                      {"encoding", mode == QueryMode::classification
                                       ? "disjunction over disallowed labels c of (Y_c >= Y_a for all allowed a)"
                                       : "Y_0 bounded away from the allowed signs with zero band [-epsilon, epsilon]"},
                      {"inputs", map.inputs},
                      {"outputs", map.outputs},
                      {"feature_names", set.feature_names},
                      {"output_name", set.output_name},
                      {"alphabet", set.alphabet.names()},
                      {"config", to_json(set.config)},
                      {"files", files}};
    write_text_file((fs::path(out_dir) / "manifest.json").string(), canonical_dump(m.document));
    return m;
}

// ---------------------------------------------------------------------------
// VNN-Lib structural check

/// Checks s-expression balance, that every top-level form is a declare-const
/// or assert, that variables are declared before use, and that numeric
/// literals are finite. Returns an error message, or nullopt when valid.
inline std::optional<std::string> check_vnnlib(const std::string& text) {
    struct Node {
        std::string atom;
        std::vector<Node> kids;
        bool list = false;
    };
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            tokens.emplace_back(1, c);
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
                   text[j] != ')' && text[j] != ';')
                ++j;
            tokens.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    std::size_t pos = 0;
    std::function<std::optional<Node>(std::string&)> parse = [&](std::string& err) -> std::optional<Node> {
        if (pos >= tokens.size()) {
            err = "unexpected end of input";
            return std::nullopt;
        }
        if (tokens[pos] == ")") {
            err = "unbalanced ')'";
            return std::nullopt;
        }
        if (tokens[pos] != "(") return Node{tokens[pos++], {}, false};
        ++pos;
        Node n{"", {}, true};
        while (pos < tokens.size() && tokens[pos] != ")") {
            auto kid = parse(err);
            if (!kid) return std::nullopt;
            n.kids.push_back(std::move(*kid));
        }
        if (pos >= tokens.size()) {
            err = "unbalanced '('";
            return std::nullopt;
        }
        ++pos;
        return n;
    };
    auto is_number = [](const std::string& s, bool& finite) {
        double v = 0.0;
        const char* b = s.data();
        const char* e = s.data() + s.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e) return false;
        finite = std::isfinite(v);
        return true;
    };
    std::set<std::string> declared;
    static const std::set<std::string> ops{"and", "or", "<=", ">=", "<", ">", "=", "+", "-", "*"};
    std::function<std::optional<std::string>(const Node&)> check_expr = [&](const Node& n) -> std::optional<std::string> {
        if (!n.list) {
            bool finite = true;
            if (is_number(n.atom, finite)) {
                if (!finite) return "non-finite literal '" + n.atom + "'";
                return std::nullopt;
            }
            if (!declared.contains(n.atom)) return "use of undeclared symbol '" + n.atom + "'";
            return std::nullopt;
        }
        if (n.kids.empty() || n.kids[0].list || !ops.contains(n.kids[0].atom)) return std::string("unknown operator");
        if (n.kids.size() < 2) return "operator '" + n.kids[0].atom + "' without operands";
        for (std::size_t i = 1; i < n.kids.size(); ++i)
            if (auto e = check_expr(n.kids[i])) return e;
        return std::nullopt;
    };
    std::size_t asserts = 0;
    while (pos < tokens.size()) {
        std::string err;
        auto form = parse(err);
        if (!form) return err;
        if (!form->list || form->kids.empty() || form->kids[0].list) return std::string("top-level form is not a command");
        const std::string& head = form->kids[0].atom;
        if (head == "declare-const") {
            if (form->kids.size() != 3 || form->kids[1].list || form->kids[2].list || form->kids[2].atom != "Real")
                return std::string("malformed declare-const");
            bool finite = true;
            if (is_number(form->kids[1].atom, finite)) return std::string("declare-const of a number");
            if (!declared.insert(form->kids[1].atom).second) return "duplicate declaration of " + form->kids[1].atom;
        } else if (head == "assert") {
            if (form->kids.size() != 2) return std::string("assert takes one expression");
            if (auto e = check_expr(form->kids[1])) return e;
            ++asserts;
        } else {
            return "unknown command '" + head + "'";
        }
    }
    if (asserts == 0) return std::string("no assertions");
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text report

namespace detail {

inline std::string display_number(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s += '0';
    }
    if (s == "-0.0") s = "0.0";
    return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(", ", start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 2;
    }
    return out;
}

} // namespace detail

struct ReportOptions {
    /// Per-feature transforms undone before printing (e.g. the ingestion
    /// normalization); empty prints stored values.
    std::vector<AffineTransform> display_transforms;
    int precision = 2;
};

inline constexpr std::string_view kIn = "\xE2\x88\x88"; // U+2208

/// Listing-style report: a header, then per specification the constrained
/// feature intervals and the allowed output labels.
inline std::string render_report(const SpecificationSet& set, const ReportOptions& opt = {}) {
    std::ostringstream out;
    out << "# features: " << detail::join(set.feature_names, ", ") << "\n";
    out << "# output: " << set.output_name << "\n";
    out << "# labels: " << detail::join(set.alphabet.names(), ", ") << "\n";
    out << "# specifications: " << set.size() << "\n";
    if (set.empty()) {
        out << "\nno specifications\n";
        return out.str();
    }
    for (std::size_t s = 0; s < set.size(); ++s) {
        const auto& spec = set.specs[s];
        out << "\nSpecification " << s + 1 << "\nPrecondition\n";
        std::vector<std::string> lines;
        for (std::size_t i = 0; i < spec.precondition.size(); ++i) {
            if (!spec.precondition[i]) continue;
            double lo = spec.precondition[i]->lo, hi = spec.precondition[i]->hi;
            if (i < opt.display_transforms.size()) {
                lo = opt.display_transforms[i].invert(lo);
                hi = opt.display_transforms[i].invert(hi);
            }
            lines.push_back("  " + set.feature_names[i] + std::string(kIn) + "[" +
                            detail::display_number(lo, opt.precision) + ", " +
                            detail::display_number(hi, opt.precision) + "]");
        }
        if (lines.empty()) lines.push_back("  (any input)");
        for (std::size_t l = 0; l < lines.size(); ++l) out << lines[l] << (l + 1 < lines.size() ? ",\n" : "\n");
        out << "Postcondition\n  " << set.output_name << kIn << "{"
            << detail::join(set.alphabet.names_of(spec.postcondition), ", ") << "}\n";
    }
    return out.str();
}

/// Reads a report produced by render_report back into a specification set.
/// Values carry the report's display precision; the grid is the bounding
/// box of all intervals with one part.
inline SpecificationSet parse_report(const std::string& text) {
    SpecificationSet set;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> labels;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) { throw InputError("report line " + std::to_string(lineno) + ": " + what); };
    auto take = [&](const std::string& prefix) -> std::optional<std::string> {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
        return std::nullopt;
    };
    auto parse_double = [&](std::string s) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    };
    Specification* current = nullptr;
    bool in_post = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto v = take("# features: ")) set.feature_names = detail::split_list(*v);
        else if (auto v2 = take("# output: ")) set.output_name = *v2;
        else if (auto v3 = take("# labels: ")) labels = detail::split_list(*v3);
        else if (line.rfind("# ", 0) == 0 || line.empty() || line == "no specifications") continue;
        else if (line.rfind("Specification ", 0) == 0) {
            if (labels.empty() || set.feature_names.empty()) fail("specification before the header");
            if (set.alphabet.size() == 0) set.alphabet = OutputAlphabet(labels);
            set.specs.emplace_back();
            current = &set.specs.back();
            current->precondition.assign(set.feature_names.size(), std::nullopt);
            in_post = false;
        } else if (line == "Precondition") {
            in_post = false;
        } else if (line == "Postcondition") {
            in_post = true;
        } else if (line == "  (any input)") {
            continue;
        } else if (current && line.rfind("  ", 0) == 0) {
            std::string body = line.substr(2);
            if (!body.empty() && body.back() == ',') body.pop_back();
            auto at = body.find(kIn);
            if (at == std::string::npos) fail("missing membership sign");
            const std::string name = body.substr(0, at);
            const std::string rest = body.substr(at + kIn.size());
            if (in_post) {
                if (rest.size() < 2 || rest.front() != '{' || rest.back() != '}') fail("malformed label set");
                for (const auto& l : detail::split_list(rest.substr(1, rest.size() - 2)))
                    current->postcondition.insert(set.alphabet.at(l));
                current->omega = current->postcondition;
            } else {
                auto it = std::find(set.feature_names.begin(), set.feature_names.end(), name);
                if (it == set.feature_names.end()) fail("unknown feature '" + name + "'");
                if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') fail("malformed interval");
                auto parts = detail::split_list(rest.substr(1, rest.size() - 2));
                if (parts.size() != 2) fail("malformed interval");
                current->precondition[static_cast<std::size_t>(it - set.feature_names.begin())] =
                    Interval{parse_double(parts[0]), parse_double(parts[1])};
            }
        } else {
            fail("unexpected line '" + line + "'");
        }
    }
    if (set.alphabet.size() == 0 && !labels.empty()) set.alphabet = OutputAlphabet(labels);
    if (set.feature_names.empty()) throw InputError("report has no feature header");
    std::vector<double> lo(set.feature_names.size(), 0.0), hi(set.feature_names.size(), 1.0);
    std::vector<bool> seen(set.feature_names.size(), false);
    std::size_t eta = 1;
    for (const auto& s : set.specs) {
        eta = std::max(eta, s.eta());
        for (std::size_t i = 0; i < s.precondition.size(); ++i) {
            if (!s.precondition[i]) continue;
            lo[i] = seen[i] ? std::min(lo[i], s.precondition[i]->lo) : s.precondition[i]->lo;
            hi[i] = seen[i] ? std::max(hi[i], s.precondition[i]->hi) : s.precondition[i]->hi;
            seen[i] = true;
        }
    }
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) hi[i] = lo[i] + 1.0;
    set.grid = GridSpec(lo, hi, 1);
    set.config.tau_max = std::min(eta, set.alphabet.size() - 1);
    return set;
}

} // namespace spectra
