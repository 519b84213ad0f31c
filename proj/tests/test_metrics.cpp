#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "layercast/metrics.hpp"
#include "layercast/simulation.hpp"

using namespace layercast;
using fixture::kbps;

namespace {

/// Result shell with every outcome zero; grants are set per test.
ScenarioResult shell(const Overlay& ov) {
  ScenarioResult r;
  r.overlay = ov;
  r.outcomes.assign(ov.links.size() * static_cast<std::size_t>(ov.layers.count()), {});
  r.layer_rounds.assign(static_cast<std::size_t>(ov.layers.count()), 0);
  r.residual.assign(ov.downstreams.size() * static_cast<std::size_t>(ov.layers.count()), Bandwidth{});
  r.max_rounds = 4;
  return r;
}

void grant(ScenarioResult& r, int link, int k, double v) {
  r.outcomes[static_cast<std::size_t>(link * r.layer_count() + k)].granted = kbps(v);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("delivery ratio") {
    const auto ov = fixture::make({1000}, 1, {{0, 0, 1000}}, {200, 100});
    auto r = shell(ov);
    CHECK(*delivery_ratio(r, 0) == 0.0);
    grant(r, 0, 0, 200);
    grant(r, 0, 1, 50);
    CHECK(*delivery_ratio(r, 0) == 1.0);
    CHECK(*delivery_ratio(r, 1) == 0.5);
    r.overlay.downstreams[0].subscribed_level = 0;
    CHECK_FALSE(delivery_ratio(r, 1).has_value());
  }

  TEST_CASE("useless chunk ratio") {
    const auto ov = fixture::make({1000}, 1, {{0, 0, 1000}}, {200, 100});
    auto r = shell(ov);
    CHECK(useless_chunk_ratio(r) == 0.0);
    grant(r, 0, 0, 200);
    grant(r, 0, 1, 100);
    CHECK(useless_chunk_ratio(r) == 0.0);
    grant(r, 0, 0, 150);
    CHECK(useless_chunk_ratio(r) == doctest::Approx(100.0 / 250.0));
  }

  TEST_CASE("useless accounting spans links of one peer") {
    const auto ov = fixture::make({1000, 1000}, 1, {{0, 0, 1000}, {0, 1, 1000}}, {200, 100, 100});
    auto r = shell(ov);
    grant(r, 0, 0, 120);
    grant(r, 1, 0, 80);   // layer 0 complete across two links
    grant(r, 0, 1, 60);   // layer 1 short
    grant(r, 1, 2, 100);  // useless
    CHECK(useless_chunk_ratio(r) == doctest::Approx(100.0 / 360.0));
  }

  TEST_CASE("streaming cost per peer and per class") {
    const auto ov = fixture::make({2000}, 2, {{0, 0, 1000}, {1, 0, 1000}}, {600}, {2, 1}, {1, 2});
    auto r = shell(ov);
    CHECK(*avg_streaming_cost(r) == 0.0);
    grant(r, 0, 0, 500);
    CHECK(peer_streaming_cost(r, 0) == doctest::Approx(1.0));
    grant(r, 1, 0, 750);
    CHECK(peer_streaming_cost(r, 1) == doctest::Approx(3.0));
    CHECK(*avg_streaming_cost(r) == doctest::Approx(2.0));
    CHECK(*avg_streaming_cost(r, 1) == doctest::Approx(1.0));
    CHECK(*avg_streaming_cost(r, 2) == doctest::Approx(3.0));
    CHECK_FALSE(avg_streaming_cost(r, 3).has_value());
  }

  TEST_CASE("cost uses the aggregate of all layers on a link") {
    const auto ov = fixture::make({2000}, 1, {{0, 0, 1000}}, {300, 300});
    auto r = shell(ov);
    grant(r, 0, 0, 250);
    grant(r, 0, 1, 250);
    CHECK(peer_streaming_cost(r, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("abundant scenario report") {
    const auto ov = fixture::make({700}, 1, {{0, 0, 10000}}, {200, 100, 100, 100, 100, 100}, {2});
    const auto r = run_scenario(ov);
    const auto m = build_report(r);
    for (const auto& d : m.delivery) CHECK(*d == 1.0);
    CHECK(m.useless_ratio == 0.0);
    CHECK(m == build_report(r));
  }

  TEST_CASE("empty overlay report") {
    const auto ov = fixture::make({700}, 0, {}, {200, 100});
    const auto m = build_report(run_scenario(ov));
    for (const auto& d : m.delivery) CHECK_FALSE(d.has_value());
    CHECK_FALSE(m.cost_all.has_value());
    CHECK(m.useless_ratio == 0.0);
  }

  TEST_CASE("report invariants on generated runs") {
    ScenarioConfig c;
    c.n_upstream = 40;
    c.n_downstream = 80;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto ov = generate_overlay(c, seed);
      for (Mode mode : {Mode::proposed, Mode::baseline}) {
        const auto m = build_report(run_mode(mode, ov));
        CHECK(m.useless_ratio >= 0.0);
        CHECK(m.useless_ratio <= 1.0);
        for (const auto& d : m.delivery) {
          if (!d) continue;
          CHECK(*d >= 0.0);
          CHECK(*d <= 1.0);
        }
        double weighted = 0.0;
        int n = 0;
        for (std::size_t q = 0; q < m.cost_by_class.size(); ++q) {
          if (!m.cost_by_class[q]) continue;
          weighted += *m.cost_by_class[q] * m.class_counts[q];
          n += m.class_counts[q];
        }
        CHECK(std::abs(weighted / n - *m.cost_all) <= 1e-9 * std::max(1.0, *m.cost_all));
        if (mode == Mode::proposed) {
          for (std::size_t k = 0; k + 1 < m.delivery.size(); ++k) {
            if (m.delivery[k] && m.delivery[k + 1]) CHECK(*m.delivery[k] >= *m.delivery[k + 1]);
          }
        }
      }
    }
  }
}
