#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wavefront/harness.hpp"

namespace wavefront::commands {

/// Exit statuses shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kHardError = 1;  // missing or invalid config, invariant violation, I/O failure
inline constexpr int kUsage = 2;
inline constexpr int kCheckFailed = 3;  // ran to completion but an acceptance threshold was missed

struct Options {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
};

const std::vector<std::string>& names();
std::string description(const std::string& name);

/// Loads the config at `config_path` and runs one subcommand. Progress and errors go to `log`.
int run(const std::string& name, const std::string& config_path, const Options& opt, std::ostream& log);
int run(const std::string& name, harness::ExperimentConfig cfg, const Options& opt, std::ostream& log);

}  // namespace wavefront::commands
