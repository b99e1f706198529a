#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cfs {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace cfs
