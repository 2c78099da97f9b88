#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "uqmpc/errors.hpp"
#include "uqmpc/sim.hpp"
#include "uqmpc/uq.hpp"

using namespace uqmpc;

namespace {

const CaseStudyConfig& cfg() {
  static const CaseStudyConfig c = default_config();
  return c;
}

}  // namespace

TEST_CASE("disturbance recovery from state differences") {
  DisturbanceLog log;
  const Vector x = {1.0, 2.0}, u = {0.5};
  const Vector base = vadd(cfg().A * x, cfg().B * u);

  record_disturbance(log, base, x, u, cfg().A, cfg().B, cfg().W);
  CHECK(inf_norm(log.samples.back()) <= 1e-12);

  record_disturbance(log, vadd(base, Vector{0.5, 0.2}), x, u, cfg().A, cfg().B, cfg().W);
  CHECK(log.samples.back()[0] == doctest::Approx(0.5));
  CHECK(log.samples.back()[1] == doctest::Approx(0.2));

  CHECK_THROWS_AS(
      record_disturbance(log, vadd(base, Vector{0.6, 0.0}), x, u, cfg().A, cfg().B, cfg().W),
      SampleOutsideW);
  CHECK(log.samples.size() == 2);
}

TEST_CASE("a single zero sample quantifies to the origin") {
  DisturbanceLog log;
  append_sample(log, {0.0, 0.0}, cfg().W);
  const ScenarioSolution s = quantify_batch(log, cfg().W);
  CHECK(s.beta == doctest::Approx(1.0));
  CHECK(s.alpha == doctest::Approx(0.0));
  CHECK(inf_norm(s.v) <= 1e-9);
}

TEST_CASE("all four vertices force the full set") {
  DisturbanceLog log;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) append_sample(log, {0.5 * sx, 0.2 * sy}, cfg().W);
  const ScenarioSolution s = quantify_batch(log, cfg().W);
  CHECK(s.alpha == doctest::Approx(1.0));
  CHECK(s.beta == doctest::Approx(0.0));
  CHECK(s.v == zeros(2));  // pinned in the degenerate case
}

TEST_CASE("empty logs are rejected") {
  DisturbanceLog log;
  CHECK_THROWS_AS(quantify_batch(log, cfg().W), DomainError);
}

TEST_CASE("batch quantification covers and tightens monotonically") {
  std::mt19937_64 rng(101);
  const DisturbanceLog all = sample_log(cfg(), 500, rng);

  double prev_alpha = 0.0;
  for (size_t count = 50; count <= all.samples.size(); count += 50) {
    DisturbanceLog prefix;
    prefix.samples.assign(all.samples.begin(), all.samples.begin() + count);
    const ScenarioSolution s = quantify_batch(prefix, cfg().W);
    CHECK(s.alpha >= prev_alpha - 1e-12);  // more samples never shrink the set
    CHECK(s.alpha <= 1.0);
    CHECK(s.alpha >= 0.0);
    const QuantifiedSet q = to_quantified_set(s, cfg().W);
    for (const Vector& w : prefix.samples) CHECK(quantified_contains(q, w));
    prev_alpha = s.alpha;
  }
}

TEST_CASE("recursive update is a no-op for interior samples") {
  DisturbanceLog log;
  append_sample(log, {0.3, 0.1}, cfg().W);
  append_sample(log, {-0.3, -0.1}, cfg().W);
  const ScenarioSolution s = quantify_batch(log, cfg().W);
  const ScenarioSolution t = quantify_recursive(s, {0.0, 0.0}, cfg().W);
  CHECK(t.alpha == s.alpha);
  CHECK(t.v == s.v);
}

TEST_CASE("recursive update from a point matches the two-sample batch") {
  const ScenarioSolution prev{{0.0, 0.0}, 1.0, {0.0, 0.0}, 0.0};  // the set {0}
  const Vector w = {0.5, 0.2};
  const ScenarioSolution rec = quantify_recursive(prev, w, cfg().W);

  DisturbanceLog both;
  append_sample(both, {0.0, 0.0}, cfg().W);
  append_sample(both, w, cfg().W);
  const ScenarioSolution bat = quantify_batch(both, cfg().W);

  CHECK(rec.alpha == doctest::Approx(bat.alpha).epsilon(1e-9));
  CHECK(rec.v[0] == doctest::Approx(bat.v[0]).epsilon(1e-8));
  CHECK(rec.v[1] == doctest::Approx(bat.v[1]).epsilon(1e-8));
}

TEST_CASE("recursive stream stays nested and dominates the batch") {
  std::mt19937_64 rng(103);
  const DisturbanceLog all = sample_log(cfg(), 60, rng);

  DisturbanceLog prefix;
  prefix.samples.push_back(all.samples.front());
  ScenarioSolution rec = quantify_batch(prefix, cfg().W);

  for (size_t k = 1; k < all.samples.size(); ++k) {
    const ScenarioSolution prev = rec;
    rec = quantify_recursive(rec, all.samples[k], cfg().W);
    prefix.samples.push_back(all.samples[k]);
    const ScenarioSolution bat = quantify_batch(prefix, cfg().W);

    // Suboptimal but valid: a superset of the batch set.
    CHECK(rec.alpha >= bat.alpha - 1e-9);

    // Nesting in half-space form: prev rhs <= new rhs componentwise.
    const Vector vprev = cfg().W.V() * prev.v;
    const Vector vnew = cfg().W.V() * rec.v;
    for (int i = 0; i < cfg().W.facets(); ++i) {
      const double lhs = prev.alpha + (1.0 - prev.alpha) * vprev[i];
      const double rhs = rec.alpha + (1.0 - rec.alpha) * vnew[i];
      CHECK(lhs <= rhs + 1e-8);
    }

    // Every sample so far stays covered.
    const QuantifiedSet q = to_quantified_set(rec, cfg().W);
    for (const Vector& w : prefix.samples) CHECK(quantified_contains(q, w));
  }
}

TEST_CASE("sample complexity bound") {
  CHECK(sample_complexity(0.05, 1e-3, 2) == 282);
  CHECK(sample_complexity(0.9999, 0.9999, 1) == 2);
  CHECK(sample_complexity(0.1, 0.05, 2) == 80);

  // Doubling 1/eps doubles the pre-ceiling bound exactly.
  const double e = std::numbers::e;
  auto bound = [&](double eps) { return (1.0 / eps) * (e / (e - 1.0)) * (std::log(1.0 / 0.01) + 2); };
  CHECK(bound(0.05) == doctest::Approx(2.0 * bound(0.1)).epsilon(1e-15));
  CHECK(sample_complexity(0.1, 0.01, 2) == static_cast<int>(std::ceil(bound(0.1))));

  CHECK_THROWS_AS(sample_complexity(0.0, 0.5, 2), DomainError);
  CHECK_THROWS_AS(sample_complexity(0.5, 1.0, 2), DomainError);
  CHECK_THROWS_AS(sample_complexity(0.5, 0.5, 0), DomainError);
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(107);
  const DisturbanceLog log = sample_log(cfg(), 25, rng);
  std::stringstream ss;
  write_samples_csv(ss, log);
  const DisturbanceLog back = read_samples_csv(ss, cfg().W);
  REQUIRE(back.samples.size() == log.samples.size());
  for (size_t i = 0; i < log.samples.size(); ++i) CHECK(back.samples[i] == log.samples[i]);

  std::stringstream bad("0.9,0.0\n");
  CHECK_THROWS_AS(read_samples_csv(bad, cfg().W), SampleOutsideW);
}

TEST_CASE("risk bound holds empirically at reduced scale") {
  const int n_train = sample_complexity(0.1, 0.05, 2);
  std::mt19937_64 rng(109);
  int good_trials = 0;
  const int trials = 10, n_test = 20000;
  for (int t = 0; t < trials; ++t) {
    const DisturbanceLog train = sample_log(cfg(), n_train, rng);
    const QuantifiedSet q = to_quantified_set(quantify_batch(train, cfg().W), cfg().W);
    int violations = 0;
    for (int i = 0; i < n_test; ++i)
      if (!quantified_contains(q, sample_disturbance(cfg(), rng))) ++violations;
    if (violations <= static_cast<int>(0.1 * n_test)) ++good_trials;
  }
  CHECK(good_trials >= 9);
}
