#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace netreg {

using WarningSink = std::function<void(std::string_view)>;

/// Replace the process-wide warning sink (default: write to stderr).
/// Returns the previous sink. Passing an empty function restores the default.
WarningSink set_warning_sink(WarningSink sink);

/// Emit a non-fatal diagnostic through the current sink. Thread-safe.
void warn(std::string_view message);

/// Installs a sink for the lifetime of the object, restoring the previous one
/// on destruction.
class ScopedWarningSink {
public:
  explicit ScopedWarningSink(WarningSink sink)
      : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedWarningSink() { set_warning_sink(std::move(previous_)); }
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

private:
  WarningSink previous_;
};

}  // namespace netreg
