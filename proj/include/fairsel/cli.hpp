#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace fairsel::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kProtocol = 4 };

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string blackbox;
};

using Json = nlohmann::ordered_json;

/// Result documents hold a deterministic "metrics" object and an "env" object with timings.
Json cmd_fit(const Json& config, const Options& opt, const std::string& base_dir = ".");
/// Writes the per-cell CSV to opt.out; returns the best cell and row count.
Json cmd_grid(const Json& config, const Options& opt, const std::string& base_dir = ".");
Json cmd_select(const Json& config, const Options& opt, const std::string& base_dir = ".");
Json cmd_export_micp(const Json& config, const Options& opt, const std::string& base_dir = ".");
Json cmd_oracle_check(const Json& config, const Options& opt);
Json cmd_synth(const Options& opt);

/// Loads the config, dispatches, writes results and maps errors to exit codes.
int run(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err);

}  // namespace fairsel::cli
