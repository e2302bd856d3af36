#pragma once

#include <functional>
#include <string_view>

namespace phgm {

// Warnings go to stderr unless a sink is installed (the C API forwards them
// to a user callback).
using LogSink = std::function<void(std::string_view)>;
void set_log_sink(LogSink sink);
void log_warning(std::string_view message);

}  // namespace phgm
