#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "otb/dumps.hpp"
#include "otb/numfmt.hpp"
#include "support.hpp"

using namespace otb;

namespace {

ErrorKind kind_of_failure(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_dump(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

std::string message_of_failure(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_dump(in);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kMeta = R"({"n_classes":2,"layer_dims":{"-2":2},"source":"t"})";

}  // namespace

TEST_CASE("toy dump carries the nine watched vectors and argmax predictions") {
  const auto dump = testing::toy_dump();
  const auto l2 = testing::toy_l2();
  REQUIRE(dump.records.size() == 9);
  CHECK(dump.meta.n_classes == 2);
  CHECK(dump.meta.layer_dims == std::map<LayerKey, std::size_t>{{-2, 2}, {-1, 2}});
  for (std::size_t i = 0; i < 9; ++i) {
    const auto& r = dump.records[i];
    CHECK(r.id == i);
    CHECK(r.layers.at(-2) == l2[i]);
    // Oracle: pred recomputed from the dumped output layer.
    const auto& out = r.layers.at(-1);
    CHECK(r.pred == (out[1] > out[0] ? 1u : 0u));
    CHECK(r.pred == r.truth);
  }
}

TEST_CASE("round trip is identity and serialization is byte-stable") {
  const auto dump = testing::toy_dump();
  testing::TempDir tmp("dumps");
  write_dump(dump, tmp / "a.jsonl");
  const auto back = read_dump(tmp / "a.jsonl");
  CHECK(back == dump);
  CHECK(serialize_dump(back) == serialize_dump(dump));
  const auto text = serialize_dump(dump);
  CHECK(text.substr(0, text.find('\n')) ==
        R"({"n_classes":2,"layer_dims":{"-2":2,"-1":2},"source":"toy"})");
  CHECK(text.find(R"({"id":0,"truth":0,"pred":0,"layers":{"-2":[0.3,0.45],"-1":)") != std::string::npos);
}

TEST_CASE("random reals round-trip bit-exactly") {
  std::mt19937_64 rng(1);
  Dump d;
  d.meta.n_classes = 3;
  d.meta.layer_dims = {{-3, 5}, {-1, 3}};
  for (std::uint64_t i = 0; i < 200; ++i) {
    ActivationRecord r;
    r.id = i;
    r.truth = i % 3;
    r.pred = (i / 3) % 3;
    r.layers[-3] = testing::random_vector(rng, 5, -1e6, 1e6);
    r.layers[-1] = testing::random_vector(rng, 3, -1e-300, 1e-300);
    d.records.push_back(std::move(r));
  }
  std::istringstream in(serialize_dump(d));
  CHECK(parse_dump(in) == d);
}

TEST_CASE("empty record list") {
  const auto model = NetworkModel::load(testing::fixture("toy_network.json"));
  const std::vector<LayerKey> layers{-2};
  const auto d = make_network_dump(model, {}, layers, "empty");
  CHECK(d.records.empty());
  CHECK(dump_from_network(model, {}, layers).empty());
  std::istringstream in(serialize_dump(d));
  const auto back = parse_dump(in);
  CHECK(back.records.empty());
  CHECK(back.meta == d.meta);
}

TEST_CASE("schema errors") {
  const std::string meta = kMeta;
  CHECK(kind_of_failure(meta + "\n" + R"({"id":0,"truth":0,"pred":0,"layers":{"-3":[1,2]}})") ==
        ErrorKind::schema);
  CHECK(kind_of_failure(meta + "\n" + R"({"id":0,"truth":0,"pred":0,"layers":{"-2":[1,2,3]}})") ==
        ErrorKind::schema);
  CHECK(kind_of_failure(meta + "\n" + R"({"id":0,"truth":2,"pred":0,"layers":{"-2":[1,2]}})") ==
        ErrorKind::schema);
  CHECK(kind_of_failure(meta + "\n" + R"({"id":0,"truth":0,"pred":0,"layers":{}})") ==
        ErrorKind::schema);
}

TEST_CASE("parse errors name the line") {
  const std::string meta = kMeta;
  const std::string bad = meta + "\n" + R"({"id":0,"truth":0,"pred":0,"layers":{"-2":[1,2]}})" +
                          "\n{not json\n";
  CHECK(kind_of_failure(bad) == ErrorKind::parse);
  CHECK(message_of_failure(bad).find("line 3") != std::string::npos);
  CHECK(kind_of_failure("") == ErrorKind::parse);
  CHECK(kind_of_failure(meta + "\n" + R"({"id":0,"truth":0,"layers":{"-2":[1,2]}})") ==
        ErrorKind::parse);
  CHECK(kind_of_failure(R"({"n_classes":2,"layer_dims":{"x":2}})") == ErrorKind::parse);
}

TEST_CASE("missing file is an io error") {
  try {
    read_dump("/nonexistent/otb.jsonl");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("labeled CSV reading") {
  testing::TempDir tmp("csv");
  {
    std::ofstream f(tmp / "a.csv");
    f << "label,x0,x1\n0,0.5,0.5\n\n1, 0.7 ,0.2\n";
  }
  const auto rows = read_labeled_csv(tmp / "a.csv", 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].label == 1);
  CHECK(rows[1].x == Vector{0.7, 0.2});
  {
    std::ofstream f(tmp / "b.csv");
    f << "0,0.5,0.5,0.1\n";
  }
  CHECK_THROWS_AS(read_labeled_csv(tmp / "b.csv", 2), Error);
  {
    std::ofstream f(tmp / "c.csv");
    f << "0,abc\n";
  }
  CHECK_THROWS_AS(read_labeled_csv(tmp / "c.csv"), Error);
}

TEST_CASE("number formatting") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(0.30000000000000004) == "0.30000000000000004");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(parse_real("inf") == std::numeric_limits<double>::infinity());
  CHECK(parse_real("-2.5e3") == -2500.0);
  CHECK_THROWS_AS(parse_real("1.0x"), Error);
  CHECK(round_significant(0.4 - 0.1, 15) == 0.3);
  CHECK(round_significant(0.0, 15) == 0.0);
}
