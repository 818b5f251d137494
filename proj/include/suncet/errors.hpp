#pragma once

#include <stdexcept>
#include <string>

namespace suncet {

// Error taxonomy. The CLI maps these onto exit codes:
//   config_error -> 2, data_error -> 3, divergence_error -> 4, io_error -> 5.
// Everything else (shape/state/logic) exits 1.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed datasets, bad file formats, sampling preconditions (empty
// supervision, degenerate batches, oversized batch requests).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss during training; aborts the run with step context.
struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatches between tensors.
struct shape_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Backward called with a missing or stale forward cache.
struct state_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite values where finite ones are required (gradcheck probes).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Counter overflow in the compute ledger.
struct accounting_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace suncet
