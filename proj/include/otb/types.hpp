#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "otb/error.hpp"

namespace otb {

using Vector = std::vector<double>;

/// Class label. Known classes are 0..k-1; novel test classes use k and up.
using ClassId = std::size_t;

/// Signed layer index: non-negative counts from the first layer,
/// negative from the end (-1 is the output layer, -2 the last hidden one).
using LayerKey = int;

/// Watched-layer outputs of one input, keyed by layer.
using LayerVectors = std::map<LayerKey, Vector>;

inline void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    fail(ErrorKind::dimension, std::string(what) + ": expected dimension " +
                                   std::to_string(expected) + ", got " +
                                   std::to_string(got));
  }
}

}  // namespace otb
