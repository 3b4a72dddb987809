// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iostream>
#include <ostream>

namespace stnormal::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigFailure = 2,
  kIoFailure = 3,
  kNumericalFailure = 4,
};

/// Entry point for the `stnormal` command (detect, eval, synth, bench).
int run(int argc, const char* const* argv, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace stnormal::cli
