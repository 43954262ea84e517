// spectra: mine, evaluate and export interval specifications from reference logs.
//
// Exit codes: 0 success, 1 internal error, 2 usage, config or input error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "spectra/spectra.hpp"

namespace fs = std::filesystem;
using namespace spectra;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr const char* kUndefined = "n/a";

std::string fmt_metric(const std::optional<double>& v) {
    if (!v) return kUndefined;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

std::string csv_metric(const std::optional<double>& v) { return v ? detail::format_double(*v) : ""; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> expand_logs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& p : inputs) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            for (const auto& e : fs::directory_iterator(p)) {
                const auto ext = e.path().extension();
                if (e.is_regular_file() && (ext == ".csv" || ext == ".tsv" || ext == ".jsonl"))
                    out.push_back(e.path().string());
            }
        } else if (fs::is_regular_file(p, ec)) {
            out.push_back(p);
        } else {
            throw InputError("log path not found: " + p);
        }
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw InputError("no log files given");
    return out;
}

fs::path sibling_with_extension(const std::string& path, const std::string& ext) {
    fs::path p(path);
    p.replace_extension(ext);
    return p;
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw Error("cannot create " + parent.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Config assembly: defaults < schema < config file < command line

struct MineOverrides {
    std::optional<std::size_t> history;
    std::optional<double> tau_rep;
    std::optional<double> tau_cov;
    std::optional<std::size_t> parts;
    std::optional<std::size_t> tau_max;
};

MinerConfig effective_config(LogSchema& schema, const std::string& config_path, const MineOverrides& o) {
    MinerConfig base;
    base.history = schema.history;
    if (schema.output.kind == OutputSpec::Kind::sign) {
        base.discretizer = Discretizer::sign;
        base.sign_deadband = schema.output.deadband;
    }
    MinerConfig c = config_path.empty() ? base : config_from_json(read_json_file(config_path), base);
    if (o.history) c.history = *o.history;
    if (o.tau_rep) c.tau_rep = *o.tau_rep;
    if (o.tau_cov) c.tau_cov = *o.tau_cov;
    if (o.parts) c.parts = *o.parts;
    if (o.tau_max) c.tau_max = *o.tau_max;
    if (c.history < 1) throw ConfigError("history", "must be at least 1");
    schema.history = c.history;
    if (c.discretizer == Discretizer::sign) {
        schema.output.kind = OutputSpec::Kind::sign;
        schema.output.deadband = c.sign_deadband;
    } else if (schema.output.kind == OutputSpec::Kind::sign) {
        throw ConfigError("discretizer", "schema declares a sign output but the config asks for identity");
    }
    return c;
}

void label_set(SpecificationSet& set, const LogSchema& schema) { set.output_name = schema.output_display(); }

ReportOptions report_options(const LogSchema* schema, const SpecificationSet& set) {
    ReportOptions opt;
    if (schema && schema->feature_names() == set.feature_names) opt.display_transforms = schema->feature_transforms();
    return opt;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string planted;
    std::size_t n = 10000;
    std::string abr;
    std::string traces;
    std::string out;
    std::string reference = "bb";
    double reservoir = 5.0;
    double cushion = 10.0;
    std::size_t decisions = 48;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    if (a.planted.empty() == a.abr.empty()) throw InputError("simulate needs exactly one of --planted or --abr");
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw Error("cannot create " + a.out + ": " + ec.message());

    if (!a.planted.empty()) {
        const PlantedConfig cfg = planted_config_from_json(read_json_file(a.planted));
        const ObservationSet obs = sample_planted(cfg, a.n, a.seed);
        for (const auto& ref : obs.references()) {
            std::ostringstream out;
            out << "reference,trace,step";
            for (const auto& f : cfg.feature_names) out << ',' << f;
            out << ",output\n";
            for (const auto& o : ref.observations) {
                out << ref.name << ',' << o.trace_id << ',' << o.step;
                for (double v : o.features) out << ',' << detail::format_double(v);
                out << ',' << cfg.alphabet.name(o.output) << '\n';
            }
            const fs::path path = fs::path(a.out) / (ref.name + ".csv");
            write_text_file(path.string(), out.str());
            std::cout << path.string() << ": " << ref.observations.size() << " rows\n";
        }
        json schema{{"feature_columns", cfg.feature_names},
                    {"output_column", "output"},
                    {"trace_column", "trace"},
                    {"step_column", "step"},
                    {"reference_column", "reference"},
                    {"output", json{{"labels", cfg.alphabet.names()}}}};
        write_text_file((fs::path(a.out) / "schema.json").string(), canonical_dump(schema));
        return 0;
    }

    if (a.abr != "bb") throw InputError("unknown ABR controller '" + a.abr + "' (available: bb)");
    if (a.traces.empty()) throw InputError("--abr needs --traces");
    if (!fs::is_directory(a.traces, ec)) throw InputError("trace directory not found: " + a.traces);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.traces))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no trace files in " + a.traces);
    AbrSimParams params;
    params.decisions = a.decisions;
    const BufferBasedController bb{a.reservoir, a.cushion, params.ladder_kbps.size()};
    (void)buffer_based_abr(0.0, a.reservoir, a.cushion, params.ladder_kbps.size()); // validates the thresholds
    for (const auto& f : files) {
        const BandwidthTrace trace = load_bandwidth_trace(f.string());
        const auto rows = simulate_abr(trace, bb, params);
        std::ostringstream out;
        write_abr_log(out, rows, a.reference, f.stem().string(), params.ladder_kbps);
        const fs::path path = fs::path(a.out) / (a.reference + "_" + f.stem().string() + ".csv");
        write_text_file(path.string(), out.str());
        std::cout << path.string() << ": " << rows.size() << " rows\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mine

struct MineArgs {
    std::string schema;
    std::string config;
    std::string out;
    std::string regions;
    std::vector<std::string> logs;
    MineOverrides overrides;
    std::uint64_t seed = 0;
};

int cmd_mine(const MineArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    LogSchema schema = load_schema(a.schema);
    const MinerConfig config = effective_config(schema, a.config, a.overrides);
    const ObservationSet obs = load_logs(expand_logs(a.logs), schema);
    (void)validate_config(config, obs.alphabet());
    MiningRun run = mine_detailed(obs, config);
    label_set(run.set, schema);

    ensure_parent(a.out);
    write_text_file(a.out, save_specification_set(run.set));
    write_text_file(sibling_with_extension(a.out, ".txt").string(), render_report(run.set, report_options(&schema, run.set)));
    if (!a.regions.empty()) {
        std::ostringstream dump;
        std::vector<std::string> refs;
        for (const auto& r : obs.references()) refs.push_back(r.name);
        write_region_dump(dump, run.table, obs.alphabet(), refs);
        ensure_parent(a.regions);
        write_text_file(a.regions, dump.str());
    }

    const auto& s = run.set.summary;
    if (run.table.empty()) std::cerr << "warning: no interesting regions; the specification set is empty\n";
    std::cout << "observations: " << obs.size() << " (" << obs.reference_count() << " references)\n";
    std::cout << "interesting regions: " << s.interesting_regions << "\n";
    std::cout << "specifications: " << run.set.size() << "\n";
    std::cout << "relaxed coverage: " << fmt_metric(s.relaxed_coverage)
              << (s.coverage_reached ? " (threshold reached)" : "") << "\n";
    std::cout << "volume: " << detail::format_double(volume(run.set)) << "\n";
    std::cout << "omega subsets visited: " << s.omegas_visited << " of " << s.omegas_total << "\n";
    std::printf("wall time: %.3f s\n", seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string specs;
    std::string schema;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::string out;
    std::uint64_t seed = 0;
};

InterestingRegionTable region_table_for(const SpecificationSet& set, const ObservationSet& obs) {
    if (obs.empty()) return InterestingRegionTable{set.grid, {}, {}};
    RegionTable raw = tally_regions(obs, set.grid);
    return interesting(important(std::move(raw), obs, set.config.importance_fraction, set.config.importance_min_count),
                       obs.alphabet());
}

ObservationSet load_for_set(const SpecificationSet& set, LogSchema schema, const std::vector<std::string>& logs) {
    schema.history = set.config.history;
    if (set.config.discretizer == Discretizer::sign) {
        schema.output.kind = OutputSpec::Kind::sign;
        schema.output.deadband = set.config.sign_deadband;
    }
    if (schema.feature_names() != set.feature_names)
        throw InputError("dimension mismatch: schema yields features {" + detail::join(schema.feature_names(), ", ") +
                         "} but the specifications use {" + detail::join(set.feature_names, ", ") + "}");
    if (schema.output.alphabet() != set.alphabet) throw InputError("schema output labels differ from the specifications");
    return load_logs(expand_logs(logs), schema, true);
}

void print_eval_table(const std::string& split, const EvalReport& r) {
    std::printf("%-6s %-20s %10s %10s %10s\n", "split", "reference", "rows", "support", "confidence");
    if (r.references.empty()) std::printf("%-6s %-20s %10d %10s %10s\n", split.c_str(), "(none)", 0, kUndefined, kUndefined);
    for (const auto& m : r.references)
        std::printf("%-6s %-20s %10zu %10s %10s\n", split.c_str(), m.reference.c_str(), m.observations,
                    fmt_metric(m.support()).c_str(), fmt_metric(m.confidence()).c_str());
    std::printf("%-6s relaxed coverage %s\n", split.c_str(), fmt_metric(r.coverage).c_str());
}

int cmd_eval(const EvalArgs& a) {
    const SpecificationSet set = load_specification_set(a.specs);
    const LogSchema schema = load_schema(a.schema);
    json doc{{"format", "spectra-eval-report/1"},
             {"specifications", a.specs},
             {"config", to_json(set.config)},
             {"feature_names", set.feature_names},
             {"seed", a.seed}};
    bool any_undefined = false;
    auto run_split = [&](const std::string& name, const std::vector<std::string>& logs) {
        if (logs.empty()) return;
        const ObservationSet obs = load_for_set(set, schema, logs);
        const InterestingRegionTable table = region_table_for(set, obs);
        const EvalReport r = evaluate(set, obs, &table);
        print_eval_table(name, r);
        for (const auto& m : r.references) any_undefined = any_undefined || !m.support() || !m.confidence();
        any_undefined = any_undefined || r.references.empty();
        doc[name] = to_json(r);
    };
    if (a.train.empty() && a.test.empty()) throw InputError("eval needs --train and/or --test logs");
    run_split("train", a.train);
    run_split("test", a.test);
    if (any_undefined) std::cerr << "note: some metrics are undefined (no observations or none covered)\n";
    std::printf("volume: %s\n", detail::format_double(volume(set)).c_str());
    if (!a.out.empty()) {
        ensure_parent(a.out);
        write_text_file(a.out, canonical_dump(doc));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// export-vnnlib and render

struct ExportArgs {
    std::string specs;
    std::string map;
    std::string mode = "classification";
    std::string out;
    double epsilon = 1e-4;
    std::uint64_t seed = 0;
};

int cmd_export(const ExportArgs& a) {
    const SpecificationSet set = load_specification_set(a.specs);
    const ModelInterfaceMap map = model_map_from_json(read_json_file(a.map));
    const auto m = export_set(set, map, query_mode_from_string(a.mode), a.out, a.epsilon);
    std::cout << "wrote " << m.files.size() << " property files and manifest.json to " << a.out << "\n";
    return 0;
}

struct RenderArgs {
    std::string specs;
    std::string schema;
    std::string out;
    std::uint64_t seed = 0;
};

int cmd_render(const RenderArgs& a) {
    const SpecificationSet set = load_specification_set(a.specs);
    std::optional<LogSchema> schema;
    if (!a.schema.empty()) {
        schema = load_schema(a.schema);
        schema->history = set.config.history;
    }
    const std::string text = render_report(set, report_options(schema ? &*schema : nullptr, set));
    if (a.out.empty()) {
        std::cout << text;
    } else {
        ensure_parent(a.out);
        write_text_file(a.out, text);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
    std::string schema;
    std::string config;
    std::string grid;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::string out;
    std::string timing;
    std::uint64_t seed = 0;
};

struct AblationPoint {
    std::size_t history;
    double tau_rep;
    std::size_t parts;
    std::size_t tau_max;

    std::string key() const {
        return "h=" + std::to_string(history) + ";tau_rep=" + detail::format_double(tau_rep) +
               ";p=" + std::to_string(parts) + ";tau_max=" + std::to_string(tau_max);
    }
};

template <class T>
std::vector<T> grid_values(const json& g, const char* key, T fallback) {
    if (!g.contains(key)) return {fallback};
    try {
        auto v = g.at(key).get<std::vector<T>>();
        if (v.empty()) throw ConfigError(std::string("grid.") + key, "must list at least one value");
        return v;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid.") + key, e.what());
    }
}

std::vector<std::string> read_csv_keys(const std::string& path, std::string& header) {
    std::vector<std::string> keys;
    std::ifstream in(path);
    if (!in) return keys;
    std::string line;
    if (!std::getline(in, header)) return keys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        keys.push_back(line.substr(0, line.find(',')));
    }
    return keys;
}

int cmd_ablate(const AblateArgs& a) {
    const json g = read_json_file(a.grid);
    for (auto it = g.begin(); it != g.end(); ++it)
        if (it.key() != "history" && it.key() != "tau_rep" && it.key() != "parts" && it.key() != "tau_max")
            throw ConfigError("grid." + it.key(), "unknown grid parameter");
    LogSchema base_schema = load_schema(a.schema);
    const MinerConfig base = effective_config(base_schema, a.config, {});

    std::vector<AblationPoint> points;
    for (std::size_t h : grid_values<std::size_t>(g, "history", base.history))
        for (double tr : grid_values<double>(g, "tau_rep", base.tau_rep))
            for (std::size_t p : grid_values<std::size_t>(g, "parts", base.parts))
                for (std::size_t tm : grid_values<std::size_t>(g, "tau_max", base.tau_max)) points.push_back({h, tr, p, tm});

    // References (and thus columns) come from the base-history load of each split.
    const auto train_files = expand_logs(a.train);
    const auto test_files = a.test.empty() ? std::vector<std::string>{} : expand_logs(a.test);
    auto ref_names = [&](const std::vector<std::string>& files) {
        std::vector<std::string> names;
        if (files.empty()) return names;
        const ObservationSet obs = load_logs(files, base_schema, true);
        for (const auto& r : obs.references()) names.push_back(r.name);
        return names;
    };
    const auto train_refs = ref_names(train_files);
    const auto test_refs = ref_names(test_files);
    std::vector<std::string> cols{"key", "history", "tau_rep", "parts", "tau_max", "status", "specifications",
                                  "interesting_regions", "volume", "relaxed_coverage"};
    for (const auto& r : train_refs) {
        cols.push_back("train:" + r + ":support");
        cols.push_back("train:" + r + ":confidence");
    }
    for (const auto& r : test_refs) {
        cols.push_back("test:" + r + ":support");
        cols.push_back("test:" + r + ":confidence");
    }
    cols.push_back("joint");
    const std::string header = detail::join(cols, ",");

    for (const auto& p : points) {
        MinerConfig c = base;
        c.history = p.history;
        c.tau_rep = p.tau_rep;
        c.parts = p.parts;
        c.tau_max = p.tau_max;
        (void)validate_config(c, base_schema.output.alphabet());
    }

    std::string existing_header;
    const auto done_keys = read_csv_keys(a.out, existing_header);
    if (!existing_header.empty() && existing_header != header)
        throw InputError(a.out + " exists with a different header; refusing to resume");
    std::set<std::string> done(done_keys.begin(), done_keys.end());
    std::set<std::string> seen;
    std::vector<AblationPoint> todo;
    for (const auto& p : points) {
        if (!seen.insert(p.key()).second) {
            std::cerr << "note: duplicate grid key " << p.key() << " skipped\n";
            continue;
        }
        if (done.contains(p.key())) {
            std::cerr << "note: " << p.key() << " already present, skipped\n";
            continue;
        }
        todo.push_back(p);
    }

    ensure_parent(a.out);
    std::ofstream out(a.out, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot write " + a.out);
    if (existing_header.empty()) out << header << '\n' << std::flush;
    std::optional<std::ofstream> timing;
    if (!a.timing.empty()) {
        ensure_parent(a.timing);
        timing.emplace(a.timing, std::ios::app);
        if (!*timing) throw Error("cannot write " + a.timing);
    }

    struct RowResult {
        std::string line;
        double seconds = 0.0;
    };
    auto run_point = [&](const AblationPoint& p) {
        const auto t0 = std::chrono::steady_clock::now();
        LogSchema schema = base_schema;
        MinerConfig c = base;
        c.history = p.history;
        c.tau_rep = p.tau_rep;
        c.parts = p.parts;
        c.tau_max = p.tau_max;
        schema.history = p.history;
        std::vector<std::string> row{p.key(), std::to_string(p.history), detail::format_double(p.tau_rep),
                                     std::to_string(p.parts), std::to_string(p.tau_max)};
        const ObservationSet train = load_logs(train_files, schema, true);
        std::vector<std::string> metrics;
        std::vector<double> test_support, test_conf;
        auto add_metrics = [&](const ObservationSet& obs, const std::vector<std::string>& names,
                               const SpecificationSet& set, bool is_test) {
            for (const auto& name : names) {
                std::optional<double> s, cf;
                for (const auto& ref : obs.references()) {
                    if (ref.name != name) continue;
                    const auto m = evaluate_reference(set.specs, ref, set.dims());
                    s = m.support();
                    cf = m.confidence();
                }
                metrics.push_back(csv_metric(s));
                metrics.push_back(csv_metric(cf));
                if (is_test && s && cf) {
                    test_support.push_back(*s);
                    test_conf.push_back(*cf);
                }
            }
        };
        if (train.empty()) {
            row.insert(row.end(), {"no-data", "0", "0", "", ""});
            row.insert(row.end(), 2 * (train_refs.size() + test_refs.size()) + 1, "");
        } else {
            const MiningRun run = mine_detailed(train, c, 1);
            row.insert(row.end(), {"ok", std::to_string(run.set.size()), std::to_string(run.table.size()),
                                   detail::format_double(volume(run.set)), csv_metric(run.set.summary.relaxed_coverage)});
            add_metrics(train, train_refs, run.set, false);
            if (!test_files.empty()) add_metrics(load_logs(test_files, schema, true), test_refs, run.set, true);
            row.insert(row.end(), metrics.begin(), metrics.end());
            if (!test_refs.empty() && test_support.size() == test_refs.size()) {
                double ms = 0.0, mc = 0.0;
                for (std::size_t i = 0; i < test_support.size(); ++i) {
                    ms += test_support[i];
                    mc += test_conf[i];
                }
                row.push_back(detail::format_double((ms / test_support.size()) * (mc / test_conf.size())));
            } else {
                row.push_back("");
            }
        }
        return RowResult{detail::join(row, ","), seconds_since(t0)};
    };

    const std::size_t workers = worker_count();
    for (std::size_t start = 0; start < todo.size(); start += workers) {
        const std::size_t n = std::min(workers, todo.size() - start);
        std::vector<RowResult> results(n);
        parallel_for(n, workers, [&](std::size_t i) { results[i] = run_point(todo[start + i]); });
        for (std::size_t i = 0; i < n; ++i) {
            out << results[i].line << '\n' << std::flush;
            if (timing) *timing << todo[start + i].key() << ',' << detail::format_double(results[i].seconds) << '\n'
                                << std::flush;
            std::printf("%s  %.3f s\n", todo[start + i].key().c_str(), results[i].seconds);
        }
    }
    std::cout << "rows written: " << todo.size() << ", skipped: " << (points.size() - todo.size()) << "\n";
    return 0;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine interval specifications from reference logs."};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Generate reference logs (planted rules or buffer-based ABR)");
    s->add_option("--planted", sim.planted, "Planted-rule config JSON");
    s->add_option("--n", sim.n, "Observations per planted reference");
    s->add_option("--abr", sim.abr, "ABR controller (bb)");
    s->add_option("--traces", sim.traces, "Directory of bandwidth traces");
    s->add_option("--reference", sim.reference, "Reference name written into ABR logs");
    s->add_option("--reservoir", sim.reservoir, "BB reservoir, seconds");
    s->add_option("--cushion", sim.cushion, "BB cushion, seconds");
    s->add_option("--decisions", sim.decisions, "Logged decisions per trace");
    s->add_option("--out", sim.out, "Output directory")->required();
    s->add_option("--seed", sim.seed, "Random seed");

    MineArgs mine;
    auto* m = app.add_subcommand("mine", "Mine a specification set");
    m->add_option("--schema", mine.schema, "Log schema JSON")->required();
    m->add_option("--config", mine.config, "Miner config JSON");
    m->add_option("--out", mine.out, "Specification set JSON (report goes next to it as .txt)")->required();
    m->add_option("--regions", mine.regions, "Optional CSV dump of the interesting regions");
    m->add_option("--history", mine.overrides.history, "History length h");
    m->add_option("--tau-rep", mine.overrides.tau_rep, "Representation threshold");
    m->add_option("--tau-cov", mine.overrides.tau_cov, "Coverage threshold");
    m->add_option("--parts", mine.overrides.parts, "Grid parts per dimension");
    m->add_option("--tau-max", mine.overrides.tau_max, "Largest postcondition size");
    m->add_option("--seed", mine.seed, "Random seed (mining is deterministic)");
    m->add_option("logs", mine.logs, "Log files or directories")->required();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Support and confidence of a specification set");
    e->add_option("--specs", ev.specs, "Specification set JSON")->required();
    e->add_option("--schema", ev.schema, "Log schema JSON")->required();
    e->add_option("--train", ev.train, "Training logs");
    e->add_option("--test", ev.test, "Test logs");
    e->add_option("--out", ev.out, "Report JSON");
    e->add_option("--seed", ev.seed, "Random seed");

    ExportArgs ex;
    auto* x = app.add_subcommand("export-vnnlib", "Write VNN-Lib counterexample queries");
    x->add_option("--specs", ex.specs, "Specification set JSON")->required();
    x->add_option("--map", ex.map, "Model interface map JSON")->required();
    x->add_option("--mode", ex.mode, "classification or regression-sign");
    x->add_option("--epsilon", ex.epsilon, "Zero band for regression-sign");
    x->add_option("--out", ex.out, "Output directory")->required();
    x->add_option("--seed", ex.seed, "Random seed");

    RenderArgs rn;
    auto* r = app.add_subcommand("render", "Print the text report of a specification set");
    r->add_option("--specs", rn.specs, "Specification set JSON")->required();
    r->add_option("--schema", rn.schema, "Log schema JSON, for display transforms");
    r->add_option("--out", rn.out, "Output file (stdout when omitted)");
    r->add_option("--seed", rn.seed, "Random seed");

    AblateArgs ab;
    auto* a = app.add_subcommand("ablate", "Parameter sweep over history, tau_rep, parts and tau_max");
    a->add_option("--schema", ab.schema, "Log schema JSON")->required();
    a->add_option("--config", ab.config, "Base miner config JSON");
    a->add_option("--grid", ab.grid, "Grid JSON with lists for history, tau_rep, parts, tau_max")->required();
    a->add_option("--train", ab.train, "Training logs")->required();
    a->add_option("--test", ab.test, "Test logs");
    a->add_option("--out", ab.out, "Result CSV (resumed when present)")->required();
    a->add_option("--timing", ab.timing, "Optional CSV of per-row wall times");
    a->add_option("--seed", ab.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        (void)app.exit(err);
        return kExitUsage;
    }

    if (s->parsed()) return guarded([&] { return cmd_simulate(sim); });
    if (m->parsed()) return guarded([&] { return cmd_mine(mine); });
    if (e->parsed()) return guarded([&] { return cmd_eval(ev); });
    if (x->parsed()) return guarded([&] { return cmd_export(ex); });
    if (r->parsed()) return guarded([&] { return cmd_render(rn); });
    if (a->parsed()) return guarded([&] { return cmd_ablate(ab); });
    return kExitUsage;
}
