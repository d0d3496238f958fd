// SPDX-License-Identifier: Apache-2.0
#include "tinet/util.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace tinet {

namespace {
int g_max_threads = 1;
}

void set_max_threads(int n) { g_max_threads = std::max(1, n); }
int max_threads() { return g_max_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(g_max_threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  std::string tmp(token);
  errno = 0;
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && errno != ERANGE;
}

bool parse_long(std::string_view token, long& out) {
  if (token.empty()) return false;
  std::string tmp(token);
  errno = 0;
  char* end = nullptr;
  out = std::strtol(tmp.c_str(), &end, 10);
  return end == tmp.c_str() + tmp.size() && errno != ERANGE;
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

} // namespace tinet
