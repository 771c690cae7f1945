#include "otb/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "otb/parallel.hpp"

namespace otb {

using ojson = nlohmann::ordered_json;

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::box: return "box";
    case DomainKind::octagon: return "octagon";
    case DomainKind::ball: return "ball";
  }
  return "?";
}

DomainKind parse_domain(std::string_view text) {
  if (text == "box") return DomainKind::box;
  if (text == "octagon") return DomainKind::octagon;
  if (text == "ball") return DomainKind::ball;
  fail(ErrorKind::usage, "unknown domain '" + std::string(text) + "' (box|octagon|ball)");
}

DomainKind kind_of(const Abstraction& a) {
  return static_cast<DomainKind>(a.index());
}

std::size_t dim_of(const Abstraction& a) {
  return std::visit([](const auto& x) { return x.dim(); }, a);
}

Abstraction make_abstraction(DomainKind kind, std::span<const Vector> points) {
  switch (kind) {
    case DomainKind::box: return Box::create(points);
    case DomainKind::octagon: return Octagon::create(points);
    case DomainKind::ball: return Ball::create(points);
  }
  fail(ErrorKind::usage, "unknown domain");
}

bool abstraction_contains(const Abstraction& a, std::span<const double> v, double gamma) {
  if (const auto* box = std::get_if<Box>(&a)) return box->contains_enlarged(v, gamma);
  if (const auto* oct = std::get_if<Octagon>(&a)) return oct->contains_enlarged(v, gamma);
  return std::get<Ball>(a).contains(v);
}

// ---------------------------------------------------------------------------
// Training

ClassClusters cluster_layer(std::span<const ActivationRecord> records, LayerKey layer,
                            std::size_t n_classes, const ClusteringConfig& config) {
  config.validate();
  std::vector<std::vector<Vector>> per_class(n_classes);
  for (const auto& r : records) {
    auto it = r.layers.find(layer);
    if (it == r.layers.end())
      fail(ErrorKind::schema, "record " + std::to_string(r.id) + " lacks layer " +
                                  layer_key_text(layer));
    if (r.truth == r.pred && r.truth < n_classes) per_class[r.truth].push_back(it->second);
  }

  ClassClusters out{layer, config.tau, std::vector<std::vector<std::vector<Vector>>>(n_classes)};
  parallel_for(n_classes, [&](std::size_t y) {
    const auto& points = per_class[y];
    if (points.empty()) return;
    out.groups[y] = adaptive_cluster(points, config).groups(points);
  });
  return out;
}

LayerMonitor abstract_clusters(const ClassClusters& clusters, DomainKind domain) {
  LayerMonitor m{clusters.layer, domain, clusters.tau,
                 std::vector<std::vector<Abstraction>>(clusters.groups.size())};
  for (std::size_t y = 0; y < clusters.groups.size(); ++y) {
    if (clusters.groups[y].empty()) {
      warn("layer " + layer_key_text(clusters.layer) + ": class " + std::to_string(y) +
           " has no correctly classified training samples; its predictions will be rejected");
      continue;
    }
    for (const auto& group : clusters.groups[y]) m.classes[y].push_back(make_abstraction(domain, group));
  }
  return m;
}

LayerMonitor train_layer_monitor(std::span<const ActivationRecord> records, LayerKey layer,
                                 std::size_t n_classes, DomainKind domain,
                                 const ClusteringConfig& config) {
  return abstract_clusters(cluster_layer(records, layer, n_classes, config), domain);
}

bool LayerMonitor::contains(ClassId pred, std::span<const double> v, double gamma) const {
  for (const auto& a : classes.at(pred))
    if (abstraction_contains(a, v, gamma)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Monitor

Monitor::Monitor(std::vector<LayerMonitor> layers, std::size_t n_classes, double gamma)
    : layers_(std::move(layers)), n_classes_(n_classes), gamma_(gamma) {
  if (layers_.empty()) fail(ErrorKind::usage, "monitor needs at least one layer");
  if (n_classes_ == 0) fail(ErrorKind::usage, "monitor needs at least one class");
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_))
    fail(ErrorKind::usage, "enlargement factor must be finite and >= 0");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& lm = layers_[i];
    for (std::size_t j = 0; j < i; ++j)
      if (layers_[j].layer == lm.layer)
        fail(ErrorKind::usage, "layer " + layer_key_text(lm.layer) + " monitored twice");
    if (lm.classes.size() != n_classes_)
      fail(ErrorKind::schema, "layer " + layer_key_text(lm.layer) + " covers " +
                                  std::to_string(lm.classes.size()) + " classes, expected " +
                                  std::to_string(n_classes_));
    std::size_t dim = 0;
    for (const auto& list : lm.classes) {
      for (const auto& a : list) {
        if (kind_of(a) != lm.domain)
          fail(ErrorKind::schema, "layer " + layer_key_text(lm.layer) + ": abstraction kind " +
                                      std::string(to_string(kind_of(a))) + " in a " +
                                      std::string(to_string(lm.domain)) + " monitor");
        if (dim == 0) dim = dim_of(a);
        check_dim(dim, dim_of(a), "abstractions within a layer");
      }
    }
  }
}

Monitor Monitor::train(std::span<const ActivationRecord> records,
                       std::span<const LayerKey> layers, std::size_t n_classes,
                       DomainKind domain, const ClusteringConfig& config) {
  std::vector<LayerMonitor> out;
  for (LayerKey layer : layers)
    out.push_back(train_layer_monitor(records, layer, n_classes, domain, config));
  return Monitor(std::move(out), n_classes);
}

Monitor Monitor::enlarged(double gamma) const {
  Monitor m = *this;
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    fail(ErrorKind::usage, "enlargement factor must be finite and >= 0");
  m.gamma_ = gamma;
  return m;
}

const Vector& Monitor::watched_vector(const LayerVectors& watched, LayerKey layer) const {
  auto it = watched.find(layer);
  if (it == watched.end())
    fail(ErrorKind::schema, "no watched vector for layer " + layer_key_text(layer));
  return it->second;
}

Verdict Monitor::verdict(ClassId pred, const LayerVectors& watched) const {
  if (pred >= n_classes_)
    fail(ErrorKind::usage, "predicted class " + std::to_string(pred) + " unknown to a " +
                               std::to_string(n_classes_) + "-class monitor");
  Verdict v;
  v.accepted = true;
  for (const auto& lm : layers_) {
    const bool inside = lm.contains(pred, watched_vector(watched, lm.layer), gamma_);
    v.layers.push_back({lm.layer, inside});
    v.accepted = v.accepted && inside;
  }
  return v;
}

double Monitor::min_gamma_to_accept(ClassId pred, const LayerVectors& watched) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (pred >= n_classes_)
    fail(ErrorKind::usage, "predicted class " + std::to_string(pred) + " unknown to the monitor");
  double overall = 0.0;
  for (const auto& lm : layers_) {
    if (lm.domain != DomainKind::box)
      fail(ErrorKind::unsupported, "minimal enlargement factors are defined for box monitors only");
    const Vector& v = watched_vector(watched, lm.layer);
    double best = inf;
    for (const auto& a : lm.classes[pred]) best = std::min(best, std::get<Box>(a).gamma_factor(v));
    overall = std::max(overall, best);
  }
  return overall;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ojson pair_rows(const Vector& flat, std::size_t d) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i + 1 < d; ++i) {
    ojson row = ojson::array();
    for (std::size_t j = i + 1; j < d; ++j) row.push_back(flat[Octagon::pair_index(i, j, d)]);
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector flat_pairs(const ojson& rows, std::size_t d) {
  Vector flat;
  if (rows.size() != (d == 0 ? 0 : d - 1))
    fail(ErrorKind::schema, "octagon pair matrix must have dim-1 rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d - 1 - i)
      fail(ErrorKind::schema, "octagon pair matrix row " + std::to_string(i) + " has wrong length");
    for (const auto& x : rows[i]) flat.push_back(x.get<double>());
  }
  return flat;
}

ojson abstraction_json(const Abstraction& a) {
  ojson j;
  j["kind"] = std::string(to_string(kind_of(a)));
  if (const auto* box = std::get_if<Box>(&a)) {
    j["low"] = box->low();
    j["high"] = box->high();
  } else if (const auto* oct = std::get_if<Octagon>(&a)) {
    const auto& b = oct->bounds();
    const std::size_t d = oct->dim();
    j["unary"] = {{"low", b.unary_low}, {"high", b.unary_high}};
    j["sum"] = {{"low", pair_rows(b.sum_low, d)}, {"high", pair_rows(b.sum_high, d)}};
    j["diff"] = {{"low", pair_rows(b.diff_low, d)}, {"high", pair_rows(b.diff_high, d)}};
  } else {
    const auto& ball = std::get<Ball>(a);
    j["center"] = ball.center();
    j["radius"] = ball.radius();
  }
  return j;
}

Abstraction abstraction_from_json(const ojson& j) {
  const DomainKind kind = parse_domain(j.at("kind").get<std::string>());
  switch (kind) {
    case DomainKind::box:
      return Box::from_bounds(j.at("low").get<Vector>(), j.at("high").get<Vector>());
    case DomainKind::octagon: {
      Octagon::Bounds b;
      b.unary_low = j.at("unary").at("low").get<Vector>();
      b.unary_high = j.at("unary").at("high").get<Vector>();
      const std::size_t d = b.unary_low.size();
      b.sum_low = flat_pairs(j.at("sum").at("low"), d);
      b.sum_high = flat_pairs(j.at("sum").at("high"), d);
      b.diff_low = flat_pairs(j.at("diff").at("low"), d);
      b.diff_high = flat_pairs(j.at("diff").at("high"), d);
      return Octagon::from_bounds(std::move(b));
    }
    case DomainKind::ball:
      return Ball::from_center_radius(j.at("center").get<Vector>(), j.at("radius").get<double>());
  }
  fail(ErrorKind::schema, "unknown abstraction kind");
}

constexpr int kMonitorVersion = 1;

}  // namespace

std::string Monitor::to_json() const {
  ojson j;
  j["version"] = kMonitorVersion;
  j["n_classes"] = n_classes_;
  j["gamma"] = gamma_;
  j["layers"] = ojson::array();
  for (const auto& lm : layers_) {
    ojson jl;
    jl["layer"] = layer_key_text(lm.layer);
    jl["domain"] = std::string(to_string(lm.domain));
    jl["tau"] = lm.tau;
    ojson classes = ojson::object();
    for (std::size_t y = 0; y < lm.classes.size(); ++y) {
      ojson list = ojson::array();
      for (const auto& a : lm.classes[y]) list.push_back(abstraction_json(a));
      classes[std::to_string(y)] = std::move(list);
    }
    jl["classes"] = std::move(classes);
    j["layers"].push_back(std::move(jl));
  }
  return j.dump() + "\n";
}

Monitor Monitor::from_json_text(std::string_view text) {
  try {
    const ojson j = ojson::parse(text);
    const int version = j.at("version").get<int>();
    if (version != kMonitorVersion)
      fail(ErrorKind::schema, "unsupported monitor version " + std::to_string(version));
    const auto n_classes = j.at("n_classes").get<std::size_t>();
    std::vector<LayerMonitor> layers;
    for (const auto& jl : j.at("layers")) {
      LayerMonitor lm;
      lm.layer = parse_layer_key(jl.at("layer").get<std::string>());
      lm.domain = parse_domain(jl.at("domain").get<std::string>());
      lm.tau = jl.at("tau").get<double>();
      lm.classes.resize(n_classes);
      for (const auto& [key, list] : jl.at("classes").items()) {
        const std::size_t y = static_cast<std::size_t>(parse_layer_key(key));
        if (key.front() == '-' || y >= n_classes)
          fail(ErrorKind::schema, "class key '" + key + "' out of range");
        for (const auto& ja : list) lm.classes[y].push_back(abstraction_from_json(ja));
      }
      layers.push_back(std::move(lm));
    }
    return Monitor(std::move(layers), n_classes, j.at("gamma").get<double>());
  } catch (const ojson::exception& e) {
    fail(ErrorKind::parse, std::string("monitor file: ") + e.what());
  } catch (const Error& e) {
    fail(e.kind() == ErrorKind::usage ? ErrorKind::schema : e.kind(),
         std::string("monitor file: ") + e.what());
  }
}

void Monitor::save(const std::filesystem::path& path) const {
  const std::string text = to_json();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write monitor " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing monitor " + path.string());
}

Monitor Monitor::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open monitor " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace otb
