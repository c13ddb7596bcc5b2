#pragma once

#include <string_view>

namespace labornet::log {

// Reads LABORNET_LOG (error, warn, info, debug, trace, off); default warn.
void init_from_env();
void set_level(std::string_view level);

void info(std::string_view message);
void warn(std::string_view message);
void debug(std::string_view message);

}  // namespace labornet::log
