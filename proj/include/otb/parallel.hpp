#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace otb {

/// Caps library worker threads. 0 means one per hardware thread.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() threads. Each index
/// is visited exactly once; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Diagnostics go to stderr unless silenced.
void set_quiet(bool quiet);
void warn(const std::string& message);

}  // namespace otb
