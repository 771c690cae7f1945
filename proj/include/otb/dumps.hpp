#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "otb/network.hpp"
#include "otb/types.hpp"

namespace otb {

/// One sample after watching: labels plus the watched-layer outputs. The raw
/// input is not kept.
struct ActivationRecord {
  std::uint64_t id = 0;
  ClassId truth = 0;
  ClassId pred = 0;
  LayerVectors layers;

  friend bool operator==(const ActivationRecord&, const ActivationRecord&) = default;
};

struct DumpMeta {
  std::size_t n_classes = 0;
  std::map<LayerKey, std::size_t> layer_dims;
  std::string source;

  friend bool operator==(const DumpMeta&, const DumpMeta&) = default;
};

struct Dump {
  DumpMeta meta;
  std::vector<ActivationRecord> records;

  /// Enforces the dump invariants: every record carries exactly the meta's
  /// layer keys with the meta's dimensions, and labels are < n_classes.
  void validate() const;

  friend bool operator==(const Dump&, const Dump&) = default;
};

// JSON Lines: the first line is the meta object, then one record per line.
// Keys are emitted in a fixed order and reals in shortest round-trip form,
// so equal dumps serialize to identical bytes.
std::string serialize_dump(const Dump& dump);
void write_dump(const Dump& dump, const std::filesystem::path& path);
Dump parse_dump(std::istream& in);
Dump read_dump(const std::filesystem::path& path);

std::string layer_key_text(LayerKey key);
LayerKey parse_layer_key(std::string_view text);

struct LabeledInput {
  ClassId label = 0;
  Vector x;
};

/// Runs the model on every input, recording classify(x) and the requested
/// watched layers. Record ids follow input order.
std::vector<ActivationRecord> dump_from_network(const NetworkModel& model,
                                                std::span<const LabeledInput> inputs,
                                                std::span<const LayerKey> layers);

/// dump_from_network plus meta. n_classes covers both the model's outputs and
/// the largest label seen.
Dump make_network_dump(const NetworkModel& model, std::span<const LabeledInput> inputs,
                       std::span<const LayerKey> layers, std::string source);

/// CSV rows of `label,feature_0,...`; blank lines are skipped. When
/// expected_features is nonzero every row must match it.
std::vector<LabeledInput> read_labeled_csv(const std::filesystem::path& path,
                                           std::size_t expected_features = 0);

}  // namespace otb
