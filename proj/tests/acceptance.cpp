// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "otb/baseline.hpp"
#include "otb/evaluation.hpp"
#include "otb/parallel.hpp"
#include "otb/synthetic.hpp"
#include "support.hpp"

using namespace otb;

namespace {

// Pinned tolerances and bounds.
constexpr double kGoldenSeconds = 1.0;
constexpr std::size_t kPropDatasets = 120;
constexpr std::size_t kThresholdVectors = 10000;
constexpr double kMinTpRate = 0.95;
constexpr double kMaxFpRate = 0.05;
constexpr double kBoxQuerySeconds = 30.0;
constexpr double kOctagonQuerySeconds = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

bool report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
  return ok;
}

template <class F>
bool guarded(int id, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return report(id, false, std::string("exception: ") + e.what());
  }
}

// The seeded desk-scale fixture: 4 classes, centers 20 apart, spread 1,
// 500 train / 100 test per class, seed 0.
SyntheticData desk_fixture(std::uint64_t seed = 0, std::size_t k_known = 2) {
  SyntheticConfig c;
  c.seed = seed;
  c.k_known = k_known;
  return make_gaussian_blobs(c);
}

std::vector<bool> rejects_of(const ExperimentResult& r) {
  std::vector<bool> out(r.accepted.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = !r.accepted[i];
  return out;
}

// ---------------------------------------------------------------------------

bool criterion1() {
  const auto t0 = Clock::now();
  const auto model = NetworkModel::load(testing::fixture("toy_network.json"));
  const auto inputs = testing::toy_inputs();
  const auto expected = testing::toy_l2();
  std::size_t exact = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) exact += model.watch(inputs[i].x, -2) == expected[i];
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << exact << "/9 layer -2 vectors decimal-exact, " << secs << " s";
  return report(1, exact == 9 && secs < kGoldenSeconds, d.str());
}

bool criterion2() {
  const auto t0 = Clock::now();
  const auto dump = testing::toy_dump();
  ClusteringConfig cfg;
  cfg.tau = 0.75;  // keeps one cluster per class
  const std::vector<LayerKey> layers{-2};
  const auto m = Monitor::train(dump.records, layers, 2, DomainKind::box, cfg);
  const auto& classes = m.layers()[0].classes;
  bool ok = classes[0].size() == 1 && classes[1].size() == 1;
  if (ok) {
    const auto& green = std::get<Box>(classes[1][0]);
    ok = green.low() == Vector{0, 0.27} && green.high() == Vector{0.04, 0.39};
    Vector lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
    const auto w = testing::toy_l2();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        lo[j] = std::min(lo[j], w[i][j]);
        hi[j] = std::max(hi[j], w[i][j]);
      }
    const auto& blue = std::get<Box>(classes[0][0]);
    ok = ok && blue.low() == lo && blue.high() == hi;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "green [0,0.04]x[0.27,0.39] and blue min/max box, k=1 per class, " << secs << " s";
  return report(2, ok && secs < kGoldenSeconds, d.str());
}

// Random multi-blob dataset with a few mispredictions, passed through the
// dump text format so training and queries see the round-tripped values.
Dump random_dataset(std::mt19937_64& rng, std::size_t d, std::size_t classes) {
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g(0, 1);
  Dump dump;
  dump.meta.n_classes = classes;
  dump.meta.layer_dims = {{-2, d}};
  std::uint64_t id = 0;
  for (ClassId y = 0; y < classes; ++y) {
    const std::size_t blobs = 1 + rng() % 3;
    std::vector<Vector> centers;
    for (std::size_t b = 0; b < blobs; ++b) centers.push_back(testing::random_vector(rng, d, -5, 5));
    const std::size_t n = 20 + rng() % 41;
    const double spread = 0.2 + u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      Vector v = centers[rng() % blobs];
      for (auto& x : v) x += spread * g(rng);
      ActivationRecord r;
      r.id = id++;
      r.truth = y;
      r.pred = u(rng) < 0.1 ? (y + 1 + rng() % (classes - 1)) % classes : y;
      r.layers[-2] = std::move(v);
      dump.records.push_back(std::move(r));
    }
  }
  std::istringstream in(serialize_dump(dump));
  return parse_dump(in);
}

bool criterion3() {
  std::mt19937_64 rng(20240601);
  const double taus[] = {0.05, 0.07, 0.3};
  const DomainKind domains[] = {DomainKind::box, DomainKind::octagon, DomainKind::ball};
  std::size_t checked = 0, violations = 0, runs = 0;
  for (std::size_t ds = 0; ds < kPropDatasets; ++ds) {
    // Cover the extremes explicitly, then sample.
    const std::size_t d = ds == 0 ? 2 : ds == 1 ? 64 : 2 + rng() % 63;
    const std::size_t classes = ds == 0 ? 10 : ds == 1 ? 2 : 2 + rng() % 9;
    const auto dump = random_dataset(rng, d, classes);
    const double tau = taus[ds % 3];
    const std::vector<LayerKey> layers{-2};
    ClusteringConfig cfg;
    cfg.tau = tau;
    cfg.seed = ds;
    const auto clusters = cluster_layer(dump.records, -2, classes, cfg);
    for (auto domain : domains) {
      const Monitor m({abstract_clusters(clusters, domain)}, classes);
      ++runs;
      for (const auto& r : dump.records) {
        if (r.truth != r.pred) continue;
        ++checked;
        if (!m.accepts(r.pred, r.layers)) ++violations;
      }
    }
  }
  std::ostringstream d;
  d << kPropDatasets << " datasets x 3 domains (d in [2,64], 2-10 classes, tau 0.05/0.07/0.3): "
    << violations << " violations in " << checked << " training-record checks";
  return report(3, violations == 0 && runs == 3 * kPropDatasets, d.str());
}

bool criterion4() {
  std::size_t violations = 0;
  std::ostringstream d;
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto data = desk_fixture(seed);
    ExperimentConfig cfg;
    cfg.clustering.seed = seed;

    // (a) gamma grid, evaluated by re-querying enlarged monitors.
    const auto m = train_experiment_monitor(data.train, data.test, cfg);
    const auto grid = parse_gamma_grid("0:1:0.05");
    if (grid.size() != 21) ++violations;
    OutcomeCounts prev;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto c = evaluate_monitor(m.enlarged(grid[i]), data.test, 2).counts;
      if (i > 0 && (c.fp > prev.fp || c.fn < prev.fn)) ++violations;
      prev = c;
    }
    const auto sweep = gamma_sweep(m, data.test, 2, grid);
    for (std::size_t i = 1; i < sweep.size(); ++i)
      if (sweep[i].counts.fp > sweep[i - 1].counts.fp || sweep[i].counts.fn < sweep[i - 1].counts.fn)
        ++violations;
    if (sweep.back().counts != prev) ++violations;

    // (b) multi-layer reject set = union of per-layer reject sets.
    const auto subsets = parse_layer_subsets("-3;-2;-1;-3,-2;-3,-2,-1");
    const auto rows = layer_combination_study(data.train, data.test, cfg, subsets);
    const auto r3 = rejects_of(rows[0].result), r2 = rejects_of(rows[1].result),
               r1 = rejects_of(rows[2].result), r32 = rejects_of(rows[3].result),
               r321 = rejects_of(rows[4].result);
    for (std::size_t i = 0; i < r3.size(); ++i) {
      if (r32[i] != (r3[i] || r2[i])) ++violations;
      if (r321[i] != (r3[i] || r2[i] || r1[i])) ++violations;
    }

    // (c) octagon rejects everything the box rejects, same clusters.
    const std::vector<DomainKind> domains{DomainKind::box, DomainKind::octagon};
    for (const auto& layers : {std::vector<LayerKey>{-2}, std::vector<LayerKey>{-3}}) {
      ExperimentConfig c2 = cfg;
      c2.layers = layers;
      const auto cmp = compare_abstractions(data.train, data.test, c2, domains, true);
      const auto box = rejects_of(cmp[0].result), oct = rejects_of(cmp[1].result);
      for (std::size_t i = 0; i < box.size(); ++i)
        if (box[i] && !oct[i]) ++violations;
    }
  }
  d << "3 seeded fixtures: 21-point gamma grid, layer unions {-3,-2},{-3,-2,-1}, octagon>=box: "
    << violations << " violations";
  return report(4, violations == 0, d.str());
}

bool criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t mismatches = 0, total = 0, boundary_hits = 0;
  const bool worked_value = effective_threshold({0.9, true, 2}) == 0.95;
  for (std::size_t n : {2u, 3u, 10u}) {
    for (double alpha : {0.9, 0.99}) {
      for (bool normalize : {false, true}) {
        const ThresholdConfig cfg{alpha, normalize, n};
        const double a = effective_threshold(cfg);
        const auto m = threshold_as_box_monitor(cfg, n);
        for (std::size_t q = 0; q < kThresholdVectors; ++q) {
          Vector out(n);
          if (q % 10 == 0) {
            // Probability of class 0 exactly at the threshold.
            out[0] = a;
            for (std::size_t i = 1; i < n; ++i) out[i] = (1 - a) / static_cast<double>(n - 1);
          } else if (q % 10 == 1) {
            // Peaked vectors near the threshold.
            for (auto& x : out) x = u(rng) * (1 - a) * 2;
            out[rng() % n] = a + (u(rng) - 0.5) * 0.02;
          } else {
            for (auto& x : out) x = std::pow(u(rng), 4.0 * u(rng) + 0.1) * (u(rng) < 0.2 ? 100 : 1);
          }
          const ClassId pred = argmax(out);
          const bool t = threshold_accepts(out, pred, cfg);
          const bool b = m.accepts(pred, {{-1, normalize_sum(out)}});
          mismatches += t != b;
          boundary_hits += normalize_sum(out)[pred] == a;
          ++total;
        }
      }
    }
  }
  std::ostringstream d;
  d << total << " vectors (n=2,3,10; alpha 0.9/0.99; +/-normalize): " << mismatches
    << " mismatches, " << boundary_hits << " exact-boundary cases; alpha'(0.9,n=2)=0.95 "
    << (worked_value ? "exact" : "WRONG");
  return report(5, mismatches == 0 && worked_value && total >= 4 * kThresholdVectors, d.str());
}

bool criterion6() {
  std::ostringstream d;
  bool ok = true;
  for (std::size_t k : {2u, 3u}) {
    const auto data = desk_fixture(0, k);
    for (auto domain : {DomainKind::box, DomainKind::octagon, DomainKind::ball}) {
      ExperimentConfig cfg;
      cfg.k_known = k;
      cfg.domain = domain;
      cfg.include_test_training = true;
      const auto res = run_experiment(data.train, data.test, cfg);
      ok = ok && res.counts.fp == 0;
      d << "k=" << k << " " << to_string(domain) << " fp=" << res.counts.fp << "; ";
    }
  }
  return report(6, ok, "include-test-training: " + d.str());
}

bool criterion7() {
  const auto data = desk_fixture();
  ExperimentConfig cfg;  // k=2, box, tau=0.07, gamma=0, layer -2
  const auto monitor = train_experiment_monitor(data.train, data.test, cfg);
  const auto res = evaluate_monitor(monitor, data.test, cfg.k_known);
  std::size_t novel = 0, known_correct = 0;
  for (const auto& r : data.test.records) {
    if (is_novel(r.truth, cfg.k_known)) ++novel;
    else if (r.truth == r.pred) ++known_correct;
  }
  const double tp_rate = static_cast<double>(res.counts.tp) / static_cast<double>(novel);
  const double fp_rate = static_cast<double>(res.counts.fp) / static_cast<double>(known_correct);

  // Oracle: a novel record is detected iff no box of its predicted class
  // contains it, checked here with a plain interval scan.
  std::size_t oracle_outside = 0;
  for (const auto& r : data.test.records) {
    if (!is_novel(r.truth, cfg.k_known)) continue;
    const auto& v = r.layers.at(-2);
    bool inside_any = false;
    for (const auto& a : monitor.layers()[0].classes[r.pred]) {
      const auto& b = std::get<Box>(a);
      bool inside = true;
      for (std::size_t i = 0; i < v.size(); ++i) inside = inside && b.low()[i] <= v[i] && v[i] <= b.high()[i];
      inside_any = inside_any || inside;
    }
    oracle_outside += !inside_any;
  }
  std::size_t clusters = 0;
  for (const auto& c : monitor.layers()[0].classes) clusters += c.size();
  std::ostringstream d;
  d << "TP " << res.counts.tp << "/" << novel << " = " << 100 * tp_rate << "% (>= " << 100 * kMinTpRate
    << "%), FP " << res.counts.fp << "/" << known_correct << " = " << 100 * fp_rate << "% (<= "
    << 100 * kMaxFpRate << "%), oracle outside " << oracle_outside << ", " << clusters << " boxes";
  return report(7, tp_rate >= kMinTpRate && fp_rate <= kMaxFpRate && oracle_outside == res.counts.tp,
                d.str());
}

double time_queries(DomainKind domain, std::size_t dim, std::size_t* clusters) {
  SyntheticConfig c;
  c.n_classes = 10;
  c.k_known = 10;
  c.dim = dim;
  c.hidden_dim = 1;
  c.train_per_class = 200;
  c.test_per_class = 1000;  // 10,000 queries
  const auto data = make_gaussian_blobs(c);
  const std::vector<LayerKey> layers{-2};
  const auto m = Monitor::train(data.train.records, layers, 10, domain, {});
  *clusters = 0;
  for (const auto& cl : m.layers()[0].classes) *clusters += cl.size();
  const auto t0 = Clock::now();
  const auto res = evaluate_monitor(m, data.test, 10);
  const double secs = seconds_since(t0);
  if (res.counts.total() != 10000) fail(ErrorKind::usage, "expected 10,000 queries");
  return secs;
}

bool criterion8() {
  std::size_t box_clusters = 0, oct_clusters = 0;
  const double box = time_queries(DomainKind::box, 283, &box_clusters);
  const double oct = time_queries(DomainKind::octagon, 84, &oct_clusters);
  std::ostringstream d;
  d << "10,000 queries: box d=283 (" << box_clusters << " boxes) " << box << " s (< " << kBoxQuerySeconds
    << "), octagon d=84 (" << oct_clusters << " octagons) " << oct << " s (< " << kOctagonQuerySeconds
    << "), " << max_threads() << " thread(s)";
  return report(8, box < kBoxQuerySeconds && oct < kOctagonQuerySeconds, d.str());
}

}  // namespace

int main() {
  set_quiet(true);
  guarded(1, criterion1);
  guarded(2, criterion2);
  const bool c3 = guarded(3, criterion3);
  const bool c4 = guarded(4, criterion4);
  const bool c5 = guarded(5, criterion5);
  const bool c6 = guarded(6, criterion6);
  const bool c7 = guarded(7, criterion7);
  guarded(8, criterion8);
  report(9, c3 && c4 && c5 && c6 && c7,
         "informational: published figures depend on unpublished network weights; "
         "their role is covered by criteria 3-7");
  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return failures == 0 ? 0 : 1;
}
