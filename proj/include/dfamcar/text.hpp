#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dfamcar {

std::vector<std::string_view> split(std::string_view s, char sep);
void strip_cr(std::string& line);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace dfamcar
