#include "labornet/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace labornet::log {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("labornet");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return instance;
}

}  // namespace

void set_level(std::string_view level) {
  logger()->set_level(spdlog::level::from_str(std::string(level)));
}

void init_from_env() {
  if (const char* value = std::getenv("LABORNET_LOG")) set_level(value);
}

void info(std::string_view message) { logger()->info(message); }
void warn(std::string_view message) { logger()->warn(message); }
void debug(std::string_view message) { logger()->debug(message); }

}  // namespace labornet::log
