#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>

namespace fowt {

double Rng::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0)
    u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace log {

namespace {
std::atomic<Level> g_level{Level::warning};
std::mutex g_mutex;

void emit(Level lvl, std::string_view tag, std::string_view message)
{
  if (lvl < g_level.load())
    return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << "[fowt " << tag << "] " << message << '\n';
}
} // namespace

void set_level(Level lvl) { g_level.store(lvl); }
Level level() { return g_level.load(); }

void debug(std::string_view message) { emit(Level::debug, "debug", message); }
void info(std::string_view message) { emit(Level::info, "info", message); }
void warning(std::string_view message) { emit(Level::warning, "warning", message); }
void error(std::string_view message) { emit(Level::error, "error", message); }

} // namespace log
} // namespace fowt
