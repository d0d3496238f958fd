// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tinet {

/// Global worker bound for the few data-parallel loops (knn rows,
/// batch evaluation). Results are schedule-independent: workers write
/// to disjoint preallocated slots.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n) over at most max_threads() workers in
/// contiguous chunks.
void parallel_for(int n, const std::function<void(int)>& fn);

/// 17 significant digits: round-trips IEEE binary64 exactly through text.
std::string fmt_g17(double v);

bool parse_double(std::string_view token, double& out);
bool parse_long(std::string_view token, long& out);

std::vector<std::string> split(std::string_view s, char delim);

} // namespace tinet
