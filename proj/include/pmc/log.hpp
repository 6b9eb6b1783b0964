#pragma once

#include <functional>
#include <string_view>

namespace pmc::log {

using Sink = std::function<void(std::string_view)>;

// Warnings go to stderr unless a sink is installed. Passing an empty sink
// restores the default.
void set_warning_sink(Sink sink);
void warn(std::string_view message);

}  // namespace pmc::log
