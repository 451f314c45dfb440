#include "rodkit/errors.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "rodkit/parallel.hpp"

namespace rod {
namespace {
std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_enabled{true};
std::mutex g_mutex;
}  // namespace

void warn(std::string_view message) {
  ++g_warnings;
  if (!g_enabled) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

std::size_t warning_count() { return g_warnings; }

void set_warnings_enabled(bool enabled) { g_enabled = enabled; }

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace rod
