#include "suncet/accounting.hpp"

#include <algorithm>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

u128 checked_mul(u128 a, u128 b, const char* what) {
  u128 r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw accounting_error(std::string("accounting: overflow in ") + what);
  }
  return r;
}

u128 checked_add(u128 a, u128 b, const char* what) {
  u128 r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw accounting_error(std::string("accounting: overflow in ") + what);
  }
  return r;
}

}  // namespace

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

double u128_to_double(u128 v) {
  double hi = static_cast<double>(static_cast<std::uint64_t>(v >> 64));
  double lo = static_cast<double>(static_cast<std::uint64_t>(v));
  return hi * 18446744073709551616.0 + lo;
}

u128 macs_affine(u128 batch, u128 in_dim, u128 out_dim) {
  return checked_mul(checked_mul(batch, in_dim, "macs_affine"), out_dim,
                     "macs_affine");
}

u128 stack_forward_macs(const ParamStack& stack, std::size_t batch) {
  u128 total = 0;
  for (const auto& layer : stack.layers) {
    total = checked_add(
        total, macs_affine(batch, layer.spec.in_dim, layer.spec.out_dim),
        "stack_forward_macs");
  }
  return total;
}

u128 macs_sim_matrix(std::size_t m, std::size_t d) {
  return macs_affine(m, m, d);
}

u128 flops_per_update(u128 forward_macs) {
  return checked_mul(forward_macs, 6, "flops_per_update");
}

void FlopsLedger::record_update(u128 forward_macs) {
  macs_cum = checked_add(macs_cum, forward_macs, "record_update");
  if (updates_cum == UINT64_MAX) {
    throw accounting_error("accounting: update counter overflow");
  }
  updates_cum += 1;
}

}  // namespace suncet
