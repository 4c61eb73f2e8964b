#include "mfa/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace mfa {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace mfa
