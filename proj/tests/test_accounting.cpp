#include <limits>

#include "doctest.h"
#include "suncet/accounting.hpp"
#include "suncet/errors.hpp"
#include "suncet/model.hpp"

using namespace suncet;

TEST_CASE("decimal rendering of wide counters") {
  CHECK(u128_to_string(0) == "0");
  CHECK(u128_to_string(1) == "1");
  CHECK(u128_to_string(987654321) == "987654321");
  // 2^64 does not fit a u64; the printer must keep going
  u128 two64 = static_cast<u128>(std::numeric_limits<std::uint64_t>::max()) + 1;
  CHECK(u128_to_string(two64) == "18446744073709551616");
  CHECK(u128_to_string(two64 * 1000 + 7) == "18446744073709551616007");
  CHECK(u128_to_double(1000000) == 1e6);
}

TEST_CASE("affine forward cost is batch by in by out") {
  CHECK(macs_affine(1, 1, 1) == 1);
  CHECK(macs_affine(2, 3, 4) == 24);
  CHECK(macs_affine(0, 3, 4) == 0);
  CHECK(macs_affine(64, 32, 128) == 64u * 32 * 128);
}

TEST_CASE("default encoder batch-64 forward cost is pinned") {
  // dims 32 -> 128 -> 128 -> 64 at batch 64:
  // 64*(32*128 + 128*128 + 128*64) = 1835008
  ModelParams p = init_params({32, 128, 128, 64}, {64, 128, 64}, 1);
  CHECK(stack_forward_macs(p.encoder, 64) == 1835008);
  // projection: 64*(64*128 + 128*64) = 1048576
  CHECK(stack_forward_macs(p.projection, 64) == 1048576);
}

TEST_CASE("similarity matrix cost") {
  CHECK(macs_sim_matrix(4, 8) == 4 * 4 * 8);
  CHECK(macs_sim_matrix(0, 8) == 0);
}

TEST_CASE("flops are exactly six per forward mac") {
  CHECK(flops_per_update(0) == 0);
  CHECK(flops_per_update(100) == 600);
  CHECK(flops_per_update(1835008) == 6 * 1835008);
}

TEST_CASE("ledger accumulates across updates") {
  FlopsLedger ledger;
  CHECK(ledger.macs_cum == 0);
  CHECK(ledger.flops_cum() == 0);
  ledger.record_update(100);
  ledger.record_update(250);
  CHECK(ledger.macs_cum == 350);
  CHECK(ledger.updates_cum == 2);
  CHECK(ledger.flops_cum() == 2100);
}

TEST_CASE("overflow is an error, not a wrap") {
  u128 max128 = ~static_cast<u128>(0);
  CHECK_THROWS_AS(macs_affine(max128, 2, 1), accounting_error);
  CHECK_THROWS_AS(macs_affine(max128, 1, 2), accounting_error);
  FlopsLedger ledger;
  ledger.record_update(max128 / 6 + 1);  // flops_cum would overflow
  CHECK_THROWS_AS(ledger.flops_cum(), accounting_error);
  FlopsLedger ledger2;
  ledger2.record_update(max128 - 10);
  CHECK_THROWS_AS(ledger2.record_update(11), accounting_error);
}
