#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tocucrl/common.hpp"

namespace tocucrl {

/// "head:args" -> {head, args}; no colon -> {keyword, ""}.
std::pair<std::string, std::string> split_keyword(const std::string& keyword);

std::vector<std::size_t> parse_size_list(const std::string& args, std::size_t expected,
                                         const std::string& context);

/// Comma/whitespace separated reals. If `text` does not parse as numbers it
/// is treated as a path to a file holding them.
Vec parse_reals_or_file(const std::string& text);

}  // namespace tocucrl
