#pragma once

#include <filesystem>
#include <string>

#include "flexmarket/system_model.hpp"

namespace flexmarket {

/// Parses a system definition document (JSON). See docs/system_format.md.
/// Throws InputError on malformed documents; does not run validate_system.
[[nodiscard]] SystemModel parse_system(const std::string& text);
[[nodiscard]] SystemModel load_system(const std::filesystem::path& path);

[[nodiscard]] std::string system_to_json(const SystemModel& model);
void save_system(const SystemModel& model, const std::filesystem::path& path);

}  // namespace flexmarket
