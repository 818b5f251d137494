#pragma once

#include <cstdint>
#include <string>

#include "suncet/model.hpp"

namespace suncet {

// Counters use 128-bit integers: paper-scale budgets overflow u64 when
// expressed in raw flops.
using u128 = unsigned __int128;

std::string u128_to_string(u128 v);
double u128_to_double(u128 v);

// MACs of one affine layer forward pass: batch * in_dim * out_dim, bias adds
// excluded. Checked multiplication.
u128 macs_affine(u128 batch, u128 in_dim, u128 out_dim);

u128 stack_forward_macs(const ParamStack& stack, std::size_t batch);

// MACs of an m x m cosine-similarity matrix over d-dim rows: m*m*d.
u128 macs_sim_matrix(std::size_t m, std::size_t d);

// flops = MACs * 2 * 3: two flops per multiply-accumulate, tripled to cover
// the forward plus backward pass of one update.
u128 flops_per_update(u128 forward_macs);

// Cumulative forward-pass MACs across updates. Flops are always derived as
// 6 * macs_cum, never stored separately.
struct FlopsLedger {
  u128 macs_cum = 0;
  std::uint64_t updates_cum = 0;

  void record_update(u128 forward_macs);
  u128 flops_cum() const { return flops_per_update(macs_cum); }
};

}  // namespace suncet
