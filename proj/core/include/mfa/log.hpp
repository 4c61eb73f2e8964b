#pragma once

#include <functional>
#include <string_view>

namespace mfa {

using WarningSink = std::function<void(std::string_view)>;

// Default sink writes "warning: <msg>" to stderr. Passing an empty function silences warnings.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace mfa
