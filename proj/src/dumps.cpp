#include "otb/dumps.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "otb/numfmt.hpp"

namespace otb {

using json = nlohmann::json;

namespace {

void append_vector(std::string& out, const Vector& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if (!std::isfinite(v[i])) fail(ErrorKind::schema, "activation values must be finite");
    append_real(out, v[i]);
  }
  out += ']';
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string layer_key_text(LayerKey key) { return std::to_string(key); }

LayerKey parse_layer_key(std::string_view text) {
  LayerKey key = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), key);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(ErrorKind::parse, "invalid layer key '" + std::string(text) + "'");
  return key;
}

void Dump::validate() const {
  if (meta.n_classes == 0) fail(ErrorKind::schema, "dump meta: n_classes must be >= 1");
  for (const auto& [key, dim] : meta.layer_dims)
    if (dim == 0) fail(ErrorKind::schema, "dump meta: layer " + layer_key_text(key) + " has dimension 0");
  for (const auto& r : records) {
    const std::string where = "record " + std::to_string(r.id);
    if (r.truth >= meta.n_classes || r.pred >= meta.n_classes)
      fail(ErrorKind::schema, where + ": class label >= n_classes");
    if (r.layers.size() != meta.layer_dims.size())
      fail(ErrorKind::schema, where + ": layer set differs from meta");
    for (const auto& [key, v] : r.layers) {
      auto it = meta.layer_dims.find(key);
      if (it == meta.layer_dims.end())
        fail(ErrorKind::schema, where + ": layer " + layer_key_text(key) + " absent from meta");
      if (it->second != v.size())
        fail(ErrorKind::schema, where + ": layer " + layer_key_text(key) + " has dimension " +
                                    std::to_string(v.size()) + ", meta says " +
                                    std::to_string(it->second));
    }
  }
}

std::string serialize_dump(const Dump& dump) {
  dump.validate();
  std::string out;
  out += "{\"n_classes\":" + std::to_string(dump.meta.n_classes) + ",\"layer_dims\":{";
  bool first = true;
  for (const auto& [key, dim] : dump.meta.layer_dims) {
    if (!first) out += ',';
    first = false;
    out += '"' + layer_key_text(key) + "\":" + std::to_string(dim);
  }
  out += "},\"source\":" + json(dump.meta.source).dump() + "}\n";
  for (const auto& r : dump.records) {
    out += "{\"id\":" + std::to_string(r.id) + ",\"truth\":" + std::to_string(r.truth) +
           ",\"pred\":" + std::to_string(r.pred) + ",\"layers\":{";
    first = true;
    for (const auto& [key, v] : r.layers) {
      if (!first) out += ',';
      first = false;
      out += '"' + layer_key_text(key) + "\":";
      append_vector(out, v);
    }
    out += "}}\n";
  }
  return out;
}

void write_dump(const Dump& dump, const std::filesystem::path& path) {
  const std::string text = serialize_dump(dump);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write dump " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing dump " + path.string());
}

Dump parse_dump(std::istream& in) {
  Dump dump;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, where + ": " + e.what());
    }
    try {
      if (!have_meta) {
        dump.meta.n_classes = j.at("n_classes").get<std::size_t>();
        for (const auto& [k, v] : j.at("layer_dims").items())
          dump.meta.layer_dims[parse_layer_key(k)] = v.get<std::size_t>();
        dump.meta.source = j.value("source", std::string());
        have_meta = true;
        continue;
      }
      ActivationRecord r;
      r.id = j.at("id").get<std::uint64_t>();
      r.truth = j.at("truth").get<std::size_t>();
      r.pred = j.at("pred").get<std::size_t>();
      for (const auto& [k, v] : j.at("layers").items())
        r.layers[parse_layer_key(k)] = v.get<Vector>();
      dump.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, where + ": " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), where + ": " + e.what());
    }
  }
  if (!have_meta) fail(ErrorKind::parse, "dump has no meta line");
  dump.validate();
  return dump;
}

Dump read_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open dump " + path.string());
  try {
    return parse_dump(in);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<ActivationRecord> dump_from_network(const NetworkModel& model,
                                                std::span<const LabeledInput> inputs,
                                                std::span<const LayerKey> layers) {
  for (LayerKey key : layers) model.resolve(key);
  std::vector<ActivationRecord> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto outputs = model.forward(inputs[i].x);
    ActivationRecord r;
    r.id = i;
    r.truth = inputs[i].label;
    r.pred = argmax(outputs.back());
    for (LayerKey key : layers) r.layers[key] = outputs[model.resolve(key)];
    out.push_back(std::move(r));
  }
  return out;
}

Dump make_network_dump(const NetworkModel& model, std::span<const LabeledInput> inputs,
                       std::span<const LayerKey> layers, std::string source) {
  Dump d;
  d.meta.source = std::move(source);
  d.meta.n_classes = model.layers().back().out_dim();
  for (const auto& in : inputs) d.meta.n_classes = std::max(d.meta.n_classes, in.label + 1);
  for (LayerKey key : layers) d.meta.layer_dims[key] = model.layers()[model.resolve(key)].out_dim();
  d.records = dump_from_network(model, inputs, layers);
  return d;
}

std::vector<LabeledInput> read_labeled_csv(const std::filesystem::path& path,
                                           std::size_t expected_features) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open inputs " + path.string());
  std::vector<LabeledInput> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(lineno);
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    // An optional header row names the columns.
    if (rows.empty() && !cells.front().empty() &&
        std::isalpha(static_cast<unsigned char>(cells.front().front())) &&
        cells.front() != "inf" && cells.front() != "nan")
      continue;
    try {
      LabeledInput row;
      const double label = parse_real(cells.front());
      if (label < 0 || label != std::floor(label))
        fail(ErrorKind::schema, "label must be a non-negative integer");
      row.label = static_cast<ClassId>(label);
      for (std::size_t c = 1; c < cells.size(); ++c) row.x.push_back(parse_real(cells[c]));
      if (expected_features != 0 && row.x.size() != expected_features)
        fail(ErrorKind::schema, "expected " + std::to_string(expected_features) +
                                    " features, got " + std::to_string(row.x.size()));
      rows.push_back(std::move(row));
    } catch (const Error& e) {
      fail(e.kind() == ErrorKind::parse ? ErrorKind::parse : ErrorKind::schema,
           where + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace otb
