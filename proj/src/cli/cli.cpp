#include "kale/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "kale/errors.hpp"
#include "kale/pipeline.hpp"

namespace kale::cli {

namespace {

constexpr const char* kUsage = "usage: kale <mpca|dann|deepdta> [--cfg FILE] [--out DIR] [KEY VALUE]...\n";

bool is_config_error(const std::exception& e) {
    return dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ConfigTypeError*>(&e) ||
           dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FrozenError*>(&e);
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int run(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    Config cfg;
    try {
        const Config defaults = default_config(inv.subcommand);
        std::optional<std::string> overlay;
        if (inv.cfg_path) {
            std::ifstream in(*inv.cfg_path, std::ios::binary);
            if (!in) {
                err << "kale: config error: cannot read " << inv.cfg_path->string() << '\n';
                return kExitConfig;
            }
            std::ostringstream text;
            text << in.rdbuf();
            overlay = text.str();
        }
        auto overrides = inv.overrides;
        if (inv.out_dir) overrides.emplace_back("OUTPUT_DIR", inv.out_dir->generic_string());
        cfg = resolve_config(defaults, overlay, overrides);
    } catch (const ValueError& e) {
        err << "kale: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "kale: config error: " << one_line(e.what()) << '\n';
        return kExitConfig;
    }

    try {
        const std::string run_id = make_run_id(cfg);
        const std::filesystem::path dir = std::filesystem::path(cfg.get_string("OUTPUT_DIR")) / run_id;
        std::filesystem::create_directories(dir);
        {
            std::ofstream cfg_out(dir / "config.yaml", std::ios::binary | std::ios::trunc);
            if (!cfg_out) throw IoError("cannot write " + (dir / "config.yaml").string());
            cfg_out << dump_config(cfg);
        }
        const auto report = run_pipeline(inv.subcommand, cfg, RunOutput{run_id, dir});
        out << run_id << " epochs=" << report.epochs;
        for (const auto& m : report.final_metrics) out << ' ' << m.name << '=' << format_metric_value(m.value);
        out << " dir=" << dir.generic_string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "kale: " << (is_config_error(e) ? "config error: " : "pipeline error: ") << one_line(e.what()) << '\n';
        return is_config_error(e) ? kExitConfig : kExitPipeline;
    }
}

int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pipeline runner for the mpca, dann and deepdta examples", "kale"};
    app.require_subcommand(1, 1);
    CliInvocation inv;
    std::string cfg_path, out_dir;
    std::vector<std::string> pairs;
    for (const char* name : {"mpca", "dann", "deepdta"}) {
        auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " example");
        sub->add_option("--cfg", cfg_path, "YAML overlay applied on top of the defaults");
        sub->add_option("--out", out_dir, "Output directory (replaces OUTPUT_DIR)");
        sub->allow_extras();
        sub->footer("Trailing KEY VALUE pairs override config entries, last one wins.");
        sub->callback([&inv, &pairs, sub, name] {
            inv.subcommand = name;
            pairs = sub->remaining();
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "kale: " << one_line(e.what()) << '\n' << kUsage;
        return kExitUsage;
    }
    for (std::size_t i = 0; i < pairs.size(); i += 2) {
        if (pairs[i].starts_with("-")) {
            err << "kale: unknown option '" << pairs[i] << "'\n" << kUsage;
            return kExitUsage;
        }
    }
    if (pairs.size() % 2 != 0) {
        err << "kale: override '" << pairs.back() << "' has no value\n"
            << kUsage;
        return kExitUsage;
    }
    for (std::size_t i = 0; i < pairs.size(); i += 2) inv.overrides.emplace_back(pairs[i], pairs[i + 1]);
    if (!cfg_path.empty()) inv.cfg_path = cfg_path;
    if (!out_dir.empty()) inv.out_dir = out_dir;
    return run(inv, out, err);
}

}  // namespace kale::cli
