// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tinet {

/// Malformed or inconsistent input data (files, manifests, checkpoints).
/// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric breakdown (non-finite activations, degenerate geometry mid-run).
/// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contract violations (bad k, shape mismatch, negative sigma) throw
// std::invalid_argument; the CLI maps those to exit code 1.

} // namespace tinet
