#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kale/config.hpp"

namespace kale::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitPipeline = 4;

struct CliInvocation {
    std::string subcommand;
    std::optional<std::filesystem::path> cfg_path;
    std::vector<Override> overrides;
    /// Replaces OUTPUT_DIR (applied as the last override).
    std::optional<std::filesystem::path> out_dir;
};

/// Resolves the config, writes OUTPUT_DIR/<run_id>/config.yaml, runs the
/// pipeline and prints one summary line. Diagnostics go to `err` as a single
/// line; the return value is one of the kExit* codes.
int run(const CliInvocation& inv, std::ostream& out, std::ostream& err);

/// Parses `<subcommand> [--cfg FILE] [--out DIR] [KEY VALUE]...` and calls run().
int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kale::cli
