#pragma once

#include <map>
#include <string>
#include <vector>

namespace tween::util {

/// Minimal "key=value" line format used for configs stored in checkpoints.
std::map<std::string, std::string> parse_kv(const std::string& text);
std::string join_list(const std::vector<long>& values);
std::vector<long> split_list(const std::string& text);

}  // namespace tween::util
