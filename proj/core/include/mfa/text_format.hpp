#pragma once

#include <string>

namespace mfa {

/// Shortest decimal text that parses back to exactly `v`. Locale-independent,
/// so CSV and sidecar output is byte-stable across runs.
std::string format_real(double v);

}  // namespace mfa
