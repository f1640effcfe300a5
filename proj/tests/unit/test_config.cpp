#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "kale/config.hpp"
#include "kale/errors.hpp"

using kale::Config;
using kale::ConfigList;

namespace {

Config code2_defaults() {
    Config c;
    c.set("SOLVER.BASE_LR", 0.05);
    c.set("SOLVER.MAX_EPOCHS", std::int64_t{100});
    c.set("SOLVER.SEED", std::int64_t{2020});
    c.set("ISON.DEPTH", std::int64_t{34});
    return c;
}

Config rich_defaults() {
    Config c = code2_defaults();
    c.set("MODEL.NAME", std::string("isonet"));
    c.set("MODEL.PRETRAINED", false);
    c.set("MODEL.WIDTHS", ConfigList{std::int64_t{16}, std::int64_t{32}});
    c.set("MODEL.RATES", ConfigList{0.5, 0.25});
    c.set("MODEL.TAGS", ConfigList{std::string("a")});
    c.set("MODEL.EMPTY", ConfigList{});
    return c;
}

std::string fixture(const char* name) {
    std::ifstream in(std::string(KALE_FIXTURES_DIR) + "/" + name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Config, Code2Merge) {
    const auto merged = kale::resolve_config(code2_defaults(), fixture("code2_overlay.yaml"));
    EXPECT_DOUBLE_EQ(merged.get_real("SOLVER.BASE_LR"), 0.01);
    EXPECT_EQ(merged.get_int("SOLVER.MAX_EPOCHS"), 10);
    EXPECT_EQ(merged.get_int("ISON.DEPTH"), 38);
    EXPECT_EQ(merged.get_int("SOLVER.SEED"), 2020);
    EXPECT_TRUE(merged.frozen());
    const auto text = kale::dump_config(merged);
    EXPECT_NE(text.find("  BASE_LR: 0.01\n"), std::string::npos);
    EXPECT_EQ(text, "ISON:\n  DEPTH: 38\nSOLVER:\n  BASE_LR: 0.01\n  MAX_EPOCHS: 10\n  SEED: 2020\n");
}

TEST(Config, IdentityMerge) {
    const auto d = code2_defaults();
    const auto r = kale::resolve_config(d, std::nullopt);
    EXPECT_TRUE(r.frozen());
    EXPECT_EQ(r, d);
    EXPECT_EQ(kale::resolve_config(d, ""), d);
    EXPECT_EQ(kale::resolve_config(d, "# only a comment\n"), d);
    EXPECT_EQ(kale::resolve_config(d, "~"), d);
}

TEST(Config, ClosedSchema) {
    try {
        kale::resolve_config(code2_defaults(), "SOLVER:\n  LR_BASE: 0.1\n");
        FAIL();
    } catch (const kale::SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("SOLVER.LR_BASE"), std::string::npos);
    }
    EXPECT_THROW(kale::resolve_config(code2_defaults(), "NEW: 1\n"), kale::SchemaError);
    const kale::Override bad[] = {{"BAD.KEY", "1"}};
    try {
        kale::resolve_config(code2_defaults(), std::nullopt, bad);
        FAIL();
    } catch (const kale::SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("BAD.KEY"), std::string::npos);
    }
    const kale::Override subtree[] = {{"SOLVER", "1"}};
    EXPECT_THROW(kale::resolve_config(code2_defaults(), std::nullopt, subtree), kale::SchemaError);
    EXPECT_EQ(kale::resolve_config(code2_defaults(), std::nullopt).leaf_paths(), code2_defaults().leaf_paths());
}

TEST(Config, TypeRules) {
    const auto d = rich_defaults();
    EXPECT_THROW(kale::resolve_config(d, "SOLVER:\n  BASE_LR: fast\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "SOLVER:\n  MAX_EPOCHS: 0.5\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "SOLVER:\n  MAX_EPOCHS: \"10\"\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "MODEL:\n  PRETRAINED: yes\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "MODEL:\n  WIDTHS: 3\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "MODEL:\n  WIDTHS: [1, [2]]\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "MODEL:\n  NAME: [a]\n"), kale::ConfigTypeError);
    EXPECT_THROW(kale::resolve_config(d, "SOLVER: 3\n"), kale::ConfigTypeError);

    const auto r = kale::resolve_config(d, "SOLVER:\n  BASE_LR: 1\nMODEL:\n  RATES: [1, 0.5]\n  NAME: 123\n  EMPTY: [1, 2]\n");
    EXPECT_DOUBLE_EQ(r.get_real("SOLVER.BASE_LR"), 1.0);
    EXPECT_TRUE(std::holds_alternative<double>(r.get("SOLVER.BASE_LR")));
    EXPECT_EQ(r.get_real_list("MODEL.RATES"), (std::vector<double>{1.0, 0.5}));
    EXPECT_EQ(r.get_string("MODEL.NAME"), "123");
    EXPECT_EQ(r.get_int_list("MODEL.EMPTY"), (std::vector<std::int64_t>{1, 2}));
}

TEST(Config, OverridesParseToDefaultType) {
    const kale::Override ov[] = {{"SOLVER.SEED", "7"},          {"SOLVER.SEED", "9"},
                                 {"SOLVER.BASE_LR", "1e-3"},    {"MODEL.PRETRAINED", "true"},
                                 {"MODEL.WIDTHS", "[8, 4, 2]"}, {"MODEL.NAME", "res net"}};
    const auto r = kale::resolve_config(rich_defaults(), "SOLVER:\n  SEED: 5\n", ov);
    EXPECT_EQ(r.get_int("SOLVER.SEED"), 9);
    EXPECT_DOUBLE_EQ(r.get_real("SOLVER.BASE_LR"), 1e-3);
    EXPECT_TRUE(r.get_bool("MODEL.PRETRAINED"));
    EXPECT_EQ(r.get_int_list("MODEL.WIDTHS"), (std::vector<std::int64_t>{8, 4, 2}));
    EXPECT_EQ(r.get_string("MODEL.NAME"), "res net");

    const kale::Override bad_bool[] = {{"MODEL.PRETRAINED", "True"}};
    EXPECT_THROW(kale::resolve_config(rich_defaults(), std::nullopt, bad_bool), kale::ConfigTypeError);
    const kale::Override bad_int[] = {{"SOLVER.SEED", "7.5"}};
    EXPECT_THROW(kale::resolve_config(rich_defaults(), std::nullopt, bad_int), kale::ConfigTypeError);
    const kale::Override bad_list[] = {{"MODEL.WIDTHS", "[1, "}};
    EXPECT_THROW(kale::resolve_config(rich_defaults(), std::nullopt, bad_list), kale::ConfigTypeError);
}

TEST(Config, MalformedYamlReportsLine) {
    try {
        kale::resolve_config(code2_defaults(), "SOLVER:\n  BASE_LR: 0.1\n  MAX_EPOCHS: [1, 2\n");
        FAIL();
    } catch (const kale::ParseError& e) {
        EXPECT_GE(e.line(), 3);
    }
    try {
        kale::resolve_config(code2_defaults(), "- 1\n- 2\n");
        FAIL();
    } catch (const kale::ParseError& e) {
        EXPECT_EQ(e.line(), 1);
    }
}

TEST(Config, FrozenRejectsMutation) {
    auto r = kale::resolve_config(code2_defaults(), std::nullopt);
    EXPECT_THROW(r.set("SOLVER.SEED", std::int64_t{1}), kale::FrozenError);
}

TEST(Config, StructuralChecks) {
    Config c;
    c.set("A.B", std::int64_t{1});
    EXPECT_THROW(c.set("A.B.C", std::int64_t{1}), kale::SchemaError);
    EXPECT_THROW(c.set("A", std::int64_t{1}), kale::SchemaError);
    EXPECT_THROW(c.set("L", ConfigList{std::int64_t{1}, 2.0}), kale::ConfigTypeError);
    EXPECT_TRUE(c.contains("A"));
    EXPECT_FALSE(c.is_leaf("A"));
    EXPECT_TRUE(c.is_leaf("A.B"));
    EXPECT_THROW(c.get("A.X"), kale::SchemaError);
    EXPECT_THROW(c.get_string("A.B"), kale::ConfigTypeError);
    EXPECT_THROW(c.get_bool("A.B"), kale::ConfigTypeError);
    EXPECT_THROW(c.get_int_list("A.B"), kale::ConfigTypeError);
    EXPECT_THROW(c.get_real_list("A.B"), kale::ConfigTypeError);
    c.set("S", std::string("x"));
    EXPECT_THROW(c.get_int("S"), kale::ConfigTypeError);
    EXPECT_THROW(c.get_real("S"), kale::ConfigTypeError);
    c.set("SL", ConfigList{std::string("x")});
    EXPECT_THROW(c.get_int_list("SL"), kale::ConfigTypeError);
    EXPECT_THROW(c.get_real_list("SL"), kale::ConfigTypeError);
}

TEST(Config, DumpRoundTrip) {
    const kale::Override ov[] = {{"MODEL.NAME", "quote \" back\\slash\ttab"}, {"SOLVER.BASE_LR", "0.1"}};
    const auto c = kale::resolve_config(rich_defaults(), std::nullopt, ov);
    const auto text = kale::dump_config(c);
    EXPECT_NE(text.find("  BASE_LR: 0.1\n"), std::string::npos);
    EXPECT_NE(text.find("  WIDTHS: [16, 32]\n"), std::string::npos);
    EXPECT_NE(text.find("  RATES: [0.5, 0.25]\n"), std::string::npos);
    EXPECT_NE(text.find("  PRETRAINED: false\n"), std::string::npos);
    EXPECT_NE(text.find("  EMPTY: []\n"), std::string::npos);
    const auto back = kale::resolve_config(rich_defaults(), text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(kale::dump_config(back), text);
    EXPECT_EQ(kale::format_config_value(3.0), "3.0");
    EXPECT_EQ(kale::format_config_value(1e-20), "1e-20");
}

TEST(Config, InsertionOrderIrrelevant) {
    Config a, b;
    a.set("Z.Y", std::int64_t{1});
    a.set("A.B", 2.5);
    a.set("A.A", true);
    b.set("A.A", true);
    b.set("A.B", 2.5);
    b.set("Z.Y", std::int64_t{1});
    EXPECT_EQ(kale::dump_config(a), kale::dump_config(b));
    const auto ra = kale::resolve_config(a, "A:\n  B: 1.5\nZ:\n  Y: 3\n");
    const auto rb = kale::resolve_config(b, "Z:\n  Y: 3\nA:\n  B: 1.5\n");
    EXPECT_EQ(kale::dump_config(ra), kale::dump_config(rb));
}

TEST(Config, MergeIdempotent) {
    const std::string overlay = "SOLVER:\n  BASE_LR: 0.2\n";
    const auto once = kale::resolve_config(code2_defaults(), overlay);
    const auto twice = kale::resolve_config(once, overlay);
    EXPECT_EQ(once, twice);
}
