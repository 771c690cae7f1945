#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <variant>

#include "otb/clustering.hpp"
#include "otb/dumps.hpp"
#include "otb/geometry.hpp"

namespace otb {

enum class DomainKind { box, octagon, ball };

std::string_view to_string(DomainKind kind);
DomainKind parse_domain(std::string_view text);

using Abstraction = std::variant<Box, Octagon, Ball>;

DomainKind kind_of(const Abstraction& a);
std::size_t dim_of(const Abstraction& a);
Abstraction make_abstraction(DomainKind kind, std::span<const Vector> points);

/// Membership after enlargement by gamma. Balls are never enlarged.
bool abstraction_contains(const Abstraction& a, std::span<const double> v, double gamma);

/// Correctly classified vectors of one layer, clustered per class:
/// groups[class][cluster] is the cluster's point list.
struct ClassClusters {
  LayerKey layer = -1;
  double tau = 0.0;
  std::vector<std::vector<std::vector<Vector>>> groups;
};

/// Collects watched vectors of records with truth == pred == y for every
/// y < n_classes and clusters each class adaptively.
ClassClusters cluster_layer(std::span<const ActivationRecord> records, LayerKey layer,
                            std::size_t n_classes, const ClusteringConfig& config);

struct LayerMonitor {
  LayerKey layer = -1;
  DomainKind domain = DomainKind::box;
  double tau = 0.0;
  std::vector<std::vector<Abstraction>> classes;  // indexed by class

  /// True iff some abstraction of class pred contains v (enlarged by gamma).
  bool contains(ClassId pred, std::span<const double> v, double gamma) const;

  friend bool operator==(const LayerMonitor&, const LayerMonitor&) = default;
};

/// One abstraction per cluster. Classes without clusters get an empty list
/// and a warning.
LayerMonitor abstract_clusters(const ClassClusters& clusters, DomainKind domain);

LayerMonitor train_layer_monitor(std::span<const ActivationRecord> records, LayerKey layer,
                                 std::size_t n_classes, DomainKind domain,
                                 const ClusteringConfig& config);

struct LayerVerdict {
  LayerKey layer;
  bool contained;
};

struct Verdict {
  bool accepted = false;
  std::vector<LayerVerdict> layers;
};

/// Per-layer monitors combined by conjunction: an input is accepted iff every
/// layer monitor finds an abstraction of the predicted class containing its
/// watched vector.
class Monitor {
 public:
  Monitor(std::vector<LayerMonitor> layers, std::size_t n_classes, double gamma = 0.0);

  static Monitor train(std::span<const ActivationRecord> records,
                       std::span<const LayerKey> layers, std::size_t n_classes,
                       DomainKind domain, const ClusteringConfig& config);

  const std::vector<LayerMonitor>& layers() const { return layers_; }
  std::size_t n_classes() const { return n_classes_; }
  double gamma() const { return gamma_; }

  /// Copy whose verdicts enlarge boxes and octagons by gamma at query time.
  Monitor enlarged(double gamma) const;

  Verdict verdict(ClassId pred, const LayerVectors& watched) const;
  bool accepts(ClassId pred, const LayerVectors& watched) const {
    return verdict(pred, watched).accepted;
  }

  /// Smallest enlargement factor (independent of gamma()) under which the
  /// input would be accepted: per layer the minimum box factor over the
  /// class's boxes, overall the maximum over layers. +infinity when no
  /// factor helps. Box monitors only.
  double min_gamma_to_accept(ClassId pred, const LayerVectors& watched) const;

  std::string to_json() const;
  static Monitor from_json_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Monitor load(const std::filesystem::path& path);

  friend bool operator==(const Monitor&, const Monitor&) = default;

 private:
  const Vector& watched_vector(const LayerVectors& watched, LayerKey layer) const;

  std::vector<LayerMonitor> layers_;
  std::size_t n_classes_;
  double gamma_;
};

}  // namespace otb
