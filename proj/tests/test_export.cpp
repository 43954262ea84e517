#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "spectra/export.hpp"

using namespace spectra;

namespace {

std::string source(const std::string& rel) { return std::string(SPECTRA_SOURCE_DIR) + "/" + rel; }

SpecificationSet bb_thirty() { return load_specification_set(source("tests/fixtures/abr_bb_30.json")); }

ModelInterfaceMap pensieve_map() { return model_map_from_json(read_json_file(source("configs/pensieve_map.json"))); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

SpecificationSet cc_set(LabelSet post) {
    SpecificationSet set;
    for (const char* base : {"LG", "LR", "SR"})
        for (int k = 1; k <= 4; ++k) set.feature_names.push_back(std::string(base) + "[-" + std::to_string(k) + "]");
    set.output_name = "Change in Sending Rate";
    set.alphabet = OutputAlphabet::sign();
    set.grid = GridSpec(std::vector<double>(12, -1.0), std::vector<double>(12, 1.0), 50);
    Specification s;
    s.precondition.assign(12, std::nullopt);
    s.precondition[0] = Interval{-0.5, 0.5};
    s.postcondition = post;
    s.omega = post;
    set.specs = {s};
    return set;
}

ModelInterfaceMap cc_map() { return model_map_from_json(read_json_file(source("configs/cc_map.json"))); }

} // namespace

TEST(Fixture, ThirtySpecSetIsWellFormed) {
    auto set = bb_thirty();
    EXPECT_EQ(set.size(), 30u);
    EXPECT_EQ(set.alphabet.names(), (std::vector<std::string>{"300", "750", "1200", "1850", "2850", "4300"}));
    EXPECT_TRUE(check_invariants(set).empty());
    for (const auto& s : set.specs) {
        EXPECT_LE(s.eta(), 5u);
        EXPECT_FALSE(s.postcondition.empty());
    }
}

TEST(Vnnlib, LowBufferSpecExport) {
    auto set = bb_thirty();
    const auto text = export_vnnlib(set, 4, pensieve_map(), QueryMode::classification);
    EXPECT_FALSE(check_vnnlib(text)) << *check_vnnlib(text);
    EXPECT_EQ(count(text, "(declare-const X_"), 48u);
    EXPECT_EQ(count(text, "(declare-const Y_"), 6u);
    const auto& pre = set.specs[4].precondition;
    auto bound = [&](std::size_t input, const Interval& iv) {
        EXPECT_NE(text.find("(assert (>= X_" + std::to_string(input) + " " + detail::format_double(iv.lo) + "))"),
                  std::string::npos)
            << input;
        EXPECT_NE(text.find("(assert (<= X_" + std::to_string(input) + " " + detail::format_double(iv.hi) + "))"),
                  std::string::npos)
            << input;
    };
    bound(15, *pre[0]);
    bound(31, *pre[1]);
    bound(30, *pre[2]);
    bound(29, *pre[3]);
    bound(0, Interval{0, 1});
    bound(35, Interval{0, 10});
    EXPECT_NE(text.find("(assert (>= X_15 0.40000000000000002))"), std::string::npos);
    // {300, 750} allowed, four disallowed disjuncts
    EXPECT_EQ(count(text, "    (and"), 4u);
    EXPECT_NE(text.find("    (and (>= Y_2 Y_0) (>= Y_2 Y_1))"), std::string::npos);
    EXPECT_NE(text.find("    (and (>= Y_5 Y_0) (>= Y_5 Y_1))"), std::string::npos);
    EXPECT_EQ(text.find("(and (>= Y_0"), std::string::npos);
}

TEST(Vnnlib, RefusesAllLabels) {
    auto set = bb_thirty();
    set.specs[0].postcondition = set.alphabet.all();
    EXPECT_THROW(export_vnnlib(set, 0, pensieve_map(), QueryMode::classification), InputError);
}

TEST(Vnnlib, RegressionSignZeroBand) {
    auto set = cc_set(LabelSet::of({0, 1}));
    const auto text = export_vnnlib(set, 0, cc_map(), QueryMode::regression_sign);
    EXPECT_FALSE(check_vnnlib(text));
    EXPECT_NE(text.find("(assert (>= Y_0 -0.0001))\n(assert (<= Y_0 0.0001))"), std::string::npos);
    EXPECT_NE(text.find("(assert (>= X_0 -0.5))"), std::string::npos);
    EXPECT_NE(text.find("(assert (<= X_11 1))"), std::string::npos);
}

TEST(Vnnlib, RegressionSignOtherCases) {
    auto only_zero = export_vnnlib(cc_set(LabelSet::of({2})), 0, cc_map(), QueryMode::regression_sign);
    EXPECT_NE(only_zero.find("(assert (or (>= Y_0 0.0001) (<= Y_0 -0.0001)))"), std::string::npos);
    auto plus_zero = export_vnnlib(cc_set(LabelSet::of({0, 2})), 0, cc_map(), QueryMode::regression_sign);
    EXPECT_NE(plus_zero.find("(assert (<= Y_0 -0.0001))"), std::string::npos);
    auto minus_zero = export_vnnlib(cc_set(LabelSet::of({1, 2})), 0, cc_map(), QueryMode::regression_sign);
    EXPECT_NE(minus_zero.find("(assert (>= Y_0 0.0001))"), std::string::npos);
    EXPECT_THROW(export_vnnlib(cc_set(LabelSet::of({0})), 0, cc_map(), QueryMode::classification), InputError);
    EXPECT_THROW(export_vnnlib(cc_set(LabelSet::of({0})), 0, cc_map(), QueryMode::regression_sign, 0.0), InputError);
}

TEST(Vnnlib, UnmappedFeatureIsAnError) {
    auto set = bb_thirty();
    auto map = pensieve_map();
    map.feature_to_input.erase("DT[-3]");
    map.fill_ranges[29] = Interval{0, 1};
    try {
        export_vnnlib(set, 0, map, QueryMode::classification);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("DT[-3]"), std::string::npos);
    }
}

TEST(Vnnlib, ExportSetWritesOneFilePerSpec) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "spectra_export_test";
    fs::remove_all(dir);
    auto set = bb_thirty();
    auto m = export_set(set, pensieve_map(), QueryMode::classification, dir.string());
    EXPECT_EQ(m.files.size(), 30u);
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 31);
    for (const auto& f : m.files) EXPECT_FALSE(check_vnnlib(slurp(dir / f))) << f;
    auto manifest = read_json_file((dir / "manifest.json").string());
    EXPECT_EQ(manifest.at("format"), "spectra-vnnlib-manifest/1");
    EXPECT_EQ(manifest.at("files").size(), 30u);
    EXPECT_EQ(manifest.at("files")[4].at("disallowed").size(), 4u);

    fs::remove_all(dir);
    set.specs.resize(1);
    EXPECT_EQ(export_set(set, pensieve_map(), QueryMode::classification, dir.string()).files.size(), 1u);
    fs::remove_all(dir);
    set.specs.clear();
    EXPECT_TRUE(export_set(set, pensieve_map(), QueryMode::classification, dir.string()).files.empty());
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST(Vnnlib, RoundTripThroughJsonIsByteIdentical) {
    auto set = bb_thirty();
    const auto path = std::filesystem::temp_directory_path() / "spectra_roundtrip.json";
    write_text_file(path.string(), save_specification_set(set));
    auto back = load_specification_set(path.string());
    std::filesystem::remove(path);
    EXPECT_EQ(back, set);
    for (std::size_t s = 0; s < set.size(); ++s)
        EXPECT_EQ(export_vnnlib(back, s, pensieve_map(), QueryMode::classification),
                  export_vnnlib(set, s, pensieve_map(), QueryMode::classification));
}

TEST(CheckVnnlib, RejectsMalformedText) {
    EXPECT_TRUE(check_vnnlib("(declare-const X_0 Real)\n(assert (>= X_0 0)"));
    EXPECT_TRUE(check_vnnlib("(declare-const X_0 Real)\n(assert (>= X_1 0))"));
    EXPECT_TRUE(check_vnnlib("(declare-const X_0 Real)\n(assert (>= X_0 nan))"));
    EXPECT_TRUE(check_vnnlib("(declare-const X_0 Real)\n"));
    EXPECT_TRUE(check_vnnlib("(push 1)"));
    EXPECT_FALSE(check_vnnlib("; c\n(declare-const X_0 Real)\n(assert (>= X_0 -1.5e-3))\n"));
}

TEST(Report, LowBufferSpecLayout) {
    auto set = bb_thirty();
    SpecificationSet one = set;
    one.specs = {set.specs[4]};
    ReportOptions opt;
    opt.display_transforms.assign(4, AffineTransform{0.1, 0.0});
    const auto text = render_report(one, opt);
    EXPECT_NE(text.find("Specification 1\nPrecondition\n"
                        "  BS\xE2\x88\x88[4.0, 5.0],\n"
                        "  DT[-1]\xE2\x88\x88[2.8, 6.6],\n"
                        "  DT[-2]\xE2\x88\x88[2.8, 6.6],\n"
                        "  DT[-3]\xE2\x88\x88[5.4, 9.2]\n"
                        "Postcondition\n"
                        "  BR\xE2\x88\x88{300, 750}\n"),
              std::string::npos)
        << text;
}

TEST(Report, EmptySet) {
    auto set = bb_thirty();
    set.specs.clear();
    const auto text = render_report(set);
    EXPECT_NE(text.find("# specifications: 0\n\nno specifications\n"), std::string::npos);
    EXPECT_TRUE(parse_report(text).empty());
}

TEST(Report, RenderIsIdempotentThroughParse) {
    auto set = bb_thirty();
    const auto first = render_report(set);
    EXPECT_EQ(render_report(parse_report(first)), first);
    auto cc = cc_set(LabelSet::of({0, 2}));
    cc.specs.push_back(cc.specs[0]);
    cc.specs[1].precondition.assign(12, std::nullopt);
    const auto text = render_report(cc);
    EXPECT_NE(text.find("  (any input)\n"), std::string::npos);
    EXPECT_EQ(render_report(parse_report(text)), text);
}

TEST(ModelMap, ParsesRangesAndRejectsOverlap) {
    auto m = pensieve_map();
    EXPECT_EQ(m.inputs, 48u);
    EXPECT_EQ(m.fill_ranges.at(32), (Interval{0, 10}));
    EXPECT_FALSE(m.fill_ranges.contains(15));
    EXPECT_THROW(model_map_from_json(json::parse(R"({"inputs": 2, "outputs": 1, "features": {"a": 0, "b": 0}})"))
                     .validate({"a", "b"}),
                 InputError);
    EXPECT_THROW(model_map_from_json(json::parse(R"({"inputs": 2, "outputs": 1, "features": {"a": 0}})"))
                     .validate({"a"}),
                 InputError);
}
