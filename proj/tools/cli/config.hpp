#pragma once

#include "CLI11.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cfs::cli {

// key=value lines; '#' starts a comment. Surrounding quotes are stripped.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path);

// Appends `--key=value` for every config entry whose flag is absent from
// `args`, so explicit flags always win. `args` excludes the program name and
// starts with the subcommand. Throws CLI::ValidationError on unknown keys.
std::vector<std::string> merge_config(const CLI::App& sub, std::vector<std::string> args,
                                      const std::string& config_flag_a, const std::string& config_flag_b);

// Every resolved option of `sub` as key=value, readable by --config.
std::string manifest_text(const CLI::App& sub);
void write_manifest(const std::filesystem::path& dir, const CLI::App& sub);

}  // namespace cfs::cli
