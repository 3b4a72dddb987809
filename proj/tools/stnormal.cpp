// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/cli.hpp"

int main(int argc, char** argv) { return stnormal::cli::run(argc, argv); }
