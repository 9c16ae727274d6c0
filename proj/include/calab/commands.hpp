#pragma once

#include "calab/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace calab {

const std::vector<std::string>& command_names();

struct RunOptions {
    std::optional<std::uint64_t> seed; // overrides the config seed
    int threads = 1;                   // never changes results
    std::filesystem::path base_dir;    // relative file references in the config resolve here
};

struct CommandOutput {
    bool pass = false;
    std::vector<std::pair<std::string, std::string>> files; // name, contents; report.json first
    Json timing = Json::object();
};

/// Runs one command in memory. Configuration problems throw ConfigError (or another
/// ContractError); numerical failures are recorded in the report, which is then failing.
CommandOutput run_command(const std::string& command, const Json& config, const RunOptions& options);

constexpr const char* sweep_csv_header = "label,lambda1,lambda1_even,hessian_gap,p_main,p_strong,omega_self_duality_gap,error";
constexpr const char* sweep_csv_schema = "calab-sweep/1";

} // namespace calab
