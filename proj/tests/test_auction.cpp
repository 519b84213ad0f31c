#include <algorithm>
#include <random>

#include "doctest.h"
#include "layercast/auction.hpp"
#include "oracles.hpp"

using namespace layercast;

namespace {

Bandwidth kbps(double v) { return Bandwidth::from_kbps(v); }

Bid bid(int who, double q, Price p) { return {who, 0, who, 0, kbps(q), p}; }

long revenue(const std::vector<Allocation>& grants) {
  long r = 0;
  for (const auto& a : grants) r += a.payment();
  return r;
}

}  // namespace

TEST_SUITE("auction") {
  TEST_CASE("highest price is served first") {
    const std::vector<Bid> bids{bid(0, 300, 3), bid(1, 300, 2)};
    const auto g = allocate_round(kbps(500), bids);
    CHECK(g[0].granted == kbps(300));
    CHECK(g[1].granted == kbps(200));
  }

  TEST_CASE("equal prices split in proportion to requests") {
    const std::vector<Bid> bids{bid(0, 300, 2), bid(1, 100, 2)};
    const auto g = allocate_round(kbps(300), bids);
    CHECK(g[0].granted == kbps(225));
    CHECK(g[1].granted == kbps(75));
  }

  TEST_CASE("abundant supply grants everything") {
    const std::vector<Bid> bids{bid(0, 100, 1), bid(1, 200, 4), bid(2, 300, 2)};
    const auto g = allocate_round(kbps(1000), bids);
    for (std::size_t i = 0; i < bids.size(); ++i) CHECK(g[i].granted == bids[i].quantity);
  }

  TEST_CASE("empty bids and zero supply") {
    CHECK(allocate_round(kbps(100), {}).empty());
    const std::vector<Bid> bids{bid(0, 100, 1), bid(1, 50, 3)};
    for (const auto& a : allocate_round(Bandwidth{}, bids)) CHECK(a.granted == Bandwidth{});
  }

  TEST_CASE("tie split is exact to a tenth and sums to the supply") {
    const std::vector<Bid> bids{bid(0, 100, 1), bid(1, 100, 1), bid(2, 100, 1)};
    const auto g = allocate_round(kbps(100), bids);
    Bandwidth sum;
    for (const auto& a : g) {
      sum += a.granted;
      CHECK(a.granted >= kbps(33.3));
      CHECK(a.granted <= kbps(33.4));
    }
    CHECK(sum == kbps(100));
  }

  TEST_CASE("result does not depend on bid order") {
    std::mt19937_64 gen(11);
    for (int t = 0; t < 200; ++t) {
      std::vector<Bid> bids;
      const int n = 1 + static_cast<int>(gen() % 6);
      for (int i = 0; i < n; ++i) {
        bids.push_back({i, 0, i, 0, Bandwidth::from_tenths(static_cast<std::int64_t>(gen() % 3000)),
                        static_cast<Price>(1 + gen() % 3)});
      }
      const auto remaining = Bandwidth::from_tenths(static_cast<std::int64_t>(gen() % 5000));
      const auto ref = allocate_round(remaining, bids);
      auto shuffled = bids;
      std::shuffle(shuffled.begin(), shuffled.end(), gen);
      const auto got = allocate_round(remaining, shuffled);
      for (std::size_t i = 0; i < shuffled.size(); ++i) {
        const auto& want = ref[static_cast<std::size_t>(shuffled[i].downstream_id)];
        CHECK(got[i] == want);
      }
    }
  }

  TEST_CASE("revenue equals the brute-force maximum") {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 300; ++t) {
      const int n = 1 + static_cast<int>(gen() % 4);
      std::vector<oracle::IntBid> ib;
      std::vector<Bid> bids;
      for (int i = 0; i < n; ++i) {
        const int q = static_cast<int>(gen() % 10);
        const int p = 1 + static_cast<int>(gen() % 4);
        ib.push_back({q, p});
        bids.push_back(bid(i, q, p));
      }
      const int remaining = static_cast<int>(gen() % 25);
      const auto g = allocate_round(kbps(remaining), bids);
      // Revenue in tenths of currency units.
      CHECK(revenue(g) == 10 * oracle::brute_revenue(remaining, ib));
      Bandwidth sum;
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g[i].granted >= Bandwidth{});
        CHECK(g[i].granted <= bids[i].quantity);
        sum += g[i].granted;
      }
      CHECK(sum <= kbps(remaining));
    }
  }

  TEST_CASE("payment is grant times price") {
    const Allocation a{0, 0, 0, 0, kbps(50), kbps(40), 3};
    CHECK(a.payment() == 400 * 3);
  }
}

TEST_SUITE("ledger") {
  TEST_CASE("layers open in order and carry the remainder") {
    AuctionLedger l(0, kbps(500), 3);
    CHECK(l.open_layer() == 0);
    CHECK(l.remaining() == kbps(500));
    l.record_round({{0, 0, 0, 0, kbps(300), kbps(300), 1}});
    CHECK(l.remaining() == kbps(200));
    CHECK_THROWS_AS(l.advance_layer(), StateError);
    l.close_layer();
    CHECK(l.open_layer() == std::nullopt);
    CHECK(l.advance_layer() == 1);
    CHECK(l.layer(1).remaining_before == kbps(200));
    CHECK(l.layer(0).status == LayerStatus::closed);
    CHECK(l.layer(2).status == LayerStatus::pending);
  }

  TEST_CASE("finishes when upload is used up") {
    AuctionLedger l(0, kbps(200), 6);
    l.record_round({{0, 0, 0, 0, kbps(200), kbps(200), 1}});
    l.close_layer();
    CHECK(l.advance_layer() == std::nullopt);
    CHECK(l.finished());
    CHECK(l.remaining() == Bandwidth{});
  }

  TEST_CASE("finishes after the top layer") {
    AuctionLedger l(0, kbps(1000), 2);
    l.close_layer();
    CHECK(l.advance_layer() == 1);
    l.close_layer();
    CHECK(l.advance_layer() == std::nullopt);
    CHECK(l.finished());
  }

  TEST_CASE("rejects overdraws and grants above requests") {
    AuctionLedger l(0, kbps(100), 1);
    CHECK_THROWS_AS(l.record_round({{0, 0, 0, 0, kbps(150), kbps(150), 1}}), StateError);
    CHECK_THROWS_AS(l.record_round({{0, 0, 0, 0, kbps(50), kbps(60), 1}}), StateError);
    CHECK(l.total_granted() == Bandwidth{});
  }

  TEST_CASE("provisional rounds are logged but not booked") {
    AuctionLedger l(0, kbps(100), 1);
    const std::vector<Allocation> g{{0, 0, 0, 0, kbps(80), kbps(80), 1}};
    l.record_round(g, false);
    CHECK(l.total_granted() == Bandwidth{});
    CHECK(l.layer(0).rounds.size() == 1);
    l.commit(g);
    CHECK(l.total_granted() == kbps(80));
    l.close_layer();
    CHECK_THROWS_AS(l.record_round(g), StateError);
    CHECK_THROWS_AS(l.close_layer(), StateError);
  }
}
