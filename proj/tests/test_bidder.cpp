#include <cmath>
#include <random>

#include "doctest.h"
#include "layercast/bidder.hpp"
#include "oracles.hpp"

using namespace layercast;

namespace {

Bandwidth kbps(double v) { return Bandwidth::from_kbps(v); }

std::vector<Offer> offers(const std::vector<std::pair<double, double>>& px) {
  std::vector<Offer> out;
  for (auto [p, x] : px) out.push_back({p, CostCurve{x}});
  return out;
}

std::vector<oracle::Link> oracle_links(const std::vector<Offer>& o) {
  std::vector<oracle::Link> out;
  for (const auto& f : o) out.push_back({f.unit_price, f.curve.capacity, f.base});
  return out;
}

/// Grants every outstanding bid the given fraction (rounded down to a tenth).
std::vector<Allocation> grant_fraction(const std::vector<Bid>& bids, double fraction) {
  std::vector<Allocation> out;
  for (const auto& b : bids) {
    const auto g = Bandwidth::from_tenths(static_cast<std::int64_t>(std::floor(b.quantity.tenths() * fraction)));
    out.push_back({b.downstream_id, b.upstream_id, b.link, b.layer, b.quantity, g, b.unit_price});
  }
  return out;
}

BidderState single_link(Price ref, double x = 5000.0) {
  const std::vector<BidderState::LinkInput> in{{0, 0, kbps(x)}};
  return BidderState(7, 0, kbps(200), ref, in);
}

}  // namespace

TEST_SUITE("bidder") {
  TEST_CASE("layer budget") {
    CHECK(layer_budget(3, kbps(200)) == payment_for(kbps(600), 1));
    CHECK(layer_budget(1, kbps(100)) == payment_for(kbps(100), 1));
    CHECK(layer_budget(2, Bandwidth{}) == 0);
  }

  TEST_CASE("water fill splits symmetric offers evenly") {
    const auto o = offers({{1, 1000}, {1, 1000}});
    const auto r = water_fill(200.0, o);
    CHECK(r.quantities[0] == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(r.quantities[1] == doctest::Approx(100.0).epsilon(1e-6));
    CHECK_FALSE(r.shortfall);
  }

  TEST_CASE("water fill leaves a dearer link idle") {
    const auto o = offers({{1, 1000}, {2, 1000}});
    const auto r = water_fill(200.0, o);
    const auto want = oracle::kkt_split(oracle_links(o), 200.0);
    CHECK(std::abs(r.quantities[0] - want[0]) <= 0.1);
    CHECK(std::abs(r.quantities[1] - want[1]) <= 0.1);
    CHECK(r.quantities[0] == doctest::Approx(200.0).epsilon(1e-6));
    CHECK(r.quantities[1] == 0.0);
    CHECK(1.0 + oracle::dE(1000, 200) == doctest::Approx(1.0016).epsilon(1e-4));
  }

  TEST_CASE("water fill equalizes marginal costs") {
    const auto o = offers({{1, 500}, {1, 1000}});
    const auto r = water_fill(300.0, o);
    const auto grid = oracle::grid_minimizer(oracle_links(o), 300.0, 0.1);
    CHECK(std::abs(r.quantities[0] - grid[0]) <= 0.5);
    CHECK(std::abs(r.quantities[1] - grid[1]) <= 0.5);
    CHECK(r.quantities[0] == doctest::Approx(2.9).epsilon(0.05));
    CHECK(r.quantities[1] == doctest::Approx(297.1).epsilon(0.001));
  }

  TEST_CASE("grid oracle agrees with exhaustive search") {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 40; ++t) {
      const std::vector<oracle::Link> links{{1.0 + gen() % 4, 300.0 + gen() % 1700},
                                            {1.0 + gen() % 4, 300.0 + gen() % 1700}};
      const double demand = std::floor(0.5 * (links[0].x + links[1].x) * (gen() % 1000) / 1000.0);
      const auto a = oracle::grid_minimizer(links, demand, 1.0);
      const auto b = oracle::exhaustive_two(links, demand, 1.0);
      CHECK(oracle::objective(links, a) == doctest::Approx(oracle::objective(links, b)).epsilon(1e-12));
    }
  }

  TEST_CASE("water fill matches the grid minimizer and KKT") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> cap(300.0, 2000.0);
    for (int t = 0; t < 60; ++t) {
      const int n = 1 + static_cast<int>(gen() % 4);
      std::vector<Offer> o;
      double sum_x = 0.0;
      for (int j = 0; j < n; ++j) {
        o.push_back({static_cast<double>(1 + gen() % 4), CostCurve{cap(gen)}});
        sum_x += o.back().curve.capacity;
      }
      const double demand = std::floor(0.5 * sum_x * std::uniform_real_distribution<double>(0, 1)(gen) * 10) / 10;
      const auto r = water_fill(demand, o);
      double total = 0.0;
      for (double q : r.quantities) total += q;
      CHECK(std::abs(total - demand) <= 0.01);
      const auto links = oracle_links(o);
      const double mine = oracle::objective(links, r.quantities);
      const double grid = oracle::objective(links, oracle::grid_minimizer(links, demand, 0.1));
      CHECK(mine <= grid * (1.0 + 1e-3) + 1e-9);
      for (int j = 0; j < n; ++j) {
        const double m = o[j].unit_price + oracle::dE(o[j].curve.capacity, r.quantities[j]);
        if (r.quantities[j] > 0.0) {
          CHECK(std::abs(m - r.level) <= 1e-3);
        } else {
          CHECK(m >= r.level - 1e-3);
        }
      }
    }
  }

  TEST_CASE("water fill on top of kept grants") {
    std::vector<Offer> o = offers({{1, 1000}, {1, 1000}});
    o[0].base = 100.0;
    const auto r = water_fill(100.0, o);
    // Kept 100 on the first link, so the level is reached with everything on
    // the second one.
    CHECK(r.quantities[0] <= 1e-3);
    CHECK(r.quantities[1] == doctest::Approx(100.0).epsilon(1e-5));
    o[0].base = 50.0;
    const auto s = water_fill(250.0, o);
    const auto want = oracle::kkt_split(oracle_links(o), 250.0);
    CHECK(std::abs(s.quantities[0] - want[0]) <= 0.1);
    CHECK(std::abs(s.quantities[1] - want[1]) <= 0.1);
  }

  TEST_CASE("water fill respects limits and flags shortfall") {
    std::vector<Offer> o = offers({{1, 1000}, {1, 1000}});
    o[0].limit = 20.0;
    const auto r = water_fill(200.0, o);
    CHECK(r.quantities[0] == doctest::Approx(20.0));
    CHECK(r.quantities[1] == doctest::Approx(180.0).epsilon(1e-6));
    const auto small = offers({{1, 50}, {1, 60}});
    const auto s = water_fill(200.0, small);
    CHECK(s.shortfall);
    CHECK(s.quantities[0] < 50.0);
    CHECK(s.quantities[1] < 60.0);
    CHECK(water_fill(0.0, small).quantities == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("quantize keeps the total and caps") {
    const std::vector<double> q{33.33333, 33.33333, 33.33334};
    const std::vector<Bandwidth> caps{kbps(100), kbps(100), kbps(100)};
    const auto out = quantize(q, caps, kbps(100));
    CHECK(out[0] + out[1] + out[2] == kbps(100));
    const std::vector<Bandwidth> tight{kbps(10), kbps(100), kbps(100)};
    const auto t = quantize(std::vector<double>{50.0, 25.0, 25.0}, tight, kbps(100));
    CHECK(t[0] <= kbps(10));
    CHECK(t[0] + t[1] + t[2] == kbps(100));
  }

  TEST_CASE("initial bids") {
    auto one = single_link(3);
    const auto b = one.initial_bids();
    REQUIRE(b.size() == 1);
    CHECK(b[0].quantity == kbps(200));
    CHECK(b[0].unit_price == 1);

    const std::vector<BidderState::LinkInput> three{{0, 0, kbps(1000)}, {1, 1, kbps(1000)}, {2, 2, kbps(1000)}};
    BidderState sym(1, 2, kbps(300), 2, three);
    const auto bs = sym.initial_bids();
    REQUIRE(bs.size() == 3);
    for (const auto& x : bs) {
      CHECK(x.quantity == kbps(100));
      CHECK(x.unit_price == 1);
      CHECK(x.layer == 2);
      CHECK(x.upstream_id == x.link);
    }

    const std::vector<BidderState::LinkInput> empty{{0, 0, kbps(0.1)}, {1, 1, Bandwidth{}}};
    BidderState none(2, 0, kbps(200), 2, empty);
    CHECK(none.initial_bids().empty());
    CHECK(none.residual() == kbps(200));
    CHECK(none.done());
  }

  TEST_CASE("full grants end the negotiation") {
    auto s = single_link(3);
    const auto b = s.initial_bids();
    CHECK_FALSE(s.revise_bids(grant_fraction(b, 1.0)).has_value());
    CHECK(s.done());
    CHECK(s.residual() == Bandwidth{});
    CHECK(s.payments() == payment_for(kbps(200), 1));
  }

  TEST_CASE("under-grant escalates the price by one") {
    auto s = single_link(3);
    auto b = s.initial_bids();
    std::vector<Allocation> g{{7, 0, 0, 0, kbps(200), kbps(150), 1}};
    const auto next = s.revise_bids(g);
    REQUIRE(next.has_value());
    REQUIRE(next->size() == 1);
    CHECK((*next)[0].quantity == kbps(50));
    CHECK((*next)[0].unit_price == 2);
    CHECK(s.find(0)->granted == kbps(150));
  }

  TEST_CASE("under-grant at the reference price ends with a residual") {
    auto s = single_link(1);
    s.initial_bids();
    std::vector<Allocation> g{{7, 0, 0, 0, kbps(200), kbps(150), 1}};
    CHECK_FALSE(s.revise_bids(g).has_value());
    CHECK(s.done());
    CHECK(s.residual() == kbps(50));
    CHECK(s.bids().empty());
  }

  TEST_CASE("protocol errors") {
    auto s = single_link(3);
    s.initial_bids();
    std::vector<Allocation> over{{7, 0, 0, 0, kbps(200), kbps(250), 1}};
    CHECK_THROWS_AS(s.revise_bids(over), ProtocolError);
    auto t = single_link(3);
    t.initial_bids();
    std::vector<Allocation> stranger{{8, 0, 0, 0, kbps(200), kbps(100), 1}};
    CHECK_THROWS_AS(t.revise_bids(stranger), ProtocolError);
    auto u = single_link(3);
    u.initial_bids();
    CHECK_THROWS_AS(u.next_bids(), ProtocolError);
    CHECK_THROWS_AS(BidderState(0, 0, kbps(200), 0, std::vector<BidderState::LinkInput>{}), ProtocolError);
  }

  TEST_CASE("prices never fall and payments stay within budget") {
    std::mt19937_64 gen(23);
    for (int t = 0; t < 200; ++t) {
      const Price ref = 1 + static_cast<Price>(gen() % 4);
      std::vector<BidderState::LinkInput> in;
      const int n = 1 + static_cast<int>(gen() % 4);
      for (int j = 0; j < n; ++j) in.push_back({j, j, kbps(100.0 + static_cast<double>(gen() % 1500))});
      BidderState s(0, 0, kbps(200), ref, in);
      auto bids = s.initial_bids();
      std::vector<Price> last(static_cast<std::size_t>(n), 1);
      int rounds = 0;
      while (!bids.empty()) {
        ++rounds;
        std::vector<Allocation> g;
        for (const auto& b : bids) {
          const auto got = Bandwidth::from_tenths(static_cast<std::int64_t>(gen() % (b.quantity.tenths() + 1)));
          g.push_back({0, b.upstream_id, b.link, 0, b.quantity, got, b.unit_price});
        }
        const auto next = s.revise_bids(g);
        for (const auto& e : s.links()) {
          CHECK(e.price >= last[static_cast<std::size_t>(e.link)]);
          CHECK(e.price <= ref);
          last[static_cast<std::size_t>(e.link)] = e.price;
        }
        CHECK(s.payments() <= s.budget());
        CHECK(s.granted_total() <= s.layer_rate());
        bids = next ? *next : std::vector<Bid>{};
      }
      CHECK(rounds <= ref);
      CHECK(s.done());
    }
  }

  TEST_CASE("reallocate rule books grants at the fixed point") {
    const std::vector<BidderState::LinkInput> in{{0, 0, kbps(5000)}};
    BidderState s(3, 0, kbps(200), 2, in, GrantRule::reallocate);
    auto b = s.initial_bids();
    std::vector<Allocation> g{{3, 0, 0, 0, kbps(200), kbps(120), 1}};
    auto next = s.revise_bids(g);
    REQUIRE(next.has_value());
    CHECK((*next)[0].quantity == kbps(200));
    CHECK((*next)[0].unit_price == 2);
    g = {{3, 0, 0, 0, kbps(200), kbps(120), 2}};
    next = s.revise_bids(g);
    REQUIRE(next.has_value());
    // Capped at what the link delivered at the reference price.
    CHECK((*next)[0].quantity == kbps(120));
    g = {{3, 0, 0, 0, kbps(120), kbps(120), 2}};
    CHECK_FALSE(s.revise_bids(g).has_value());
    s.settle();
    CHECK(s.payments() == payment_for(kbps(120), 2));
    CHECK(s.residual() == kbps(80));
  }
}
