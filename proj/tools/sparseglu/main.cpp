// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "sparseglu/cli.hpp"

int main(int argc, char** argv) { return sparseglu::cli::run(argc, argv, std::cout, std::cerr); }
