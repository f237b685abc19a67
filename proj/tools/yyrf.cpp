// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/cli.hpp>

int
main(int argc, char **argv)
{
    return yyrf::cli::run(argc, argv);
}
