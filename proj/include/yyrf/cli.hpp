// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace yyrf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the yyrf tool; args excludes the program name.
int run(const std::vector<std::string> &args);

int run(int argc, const char *const *argv);

} // namespace yyrf::cli
