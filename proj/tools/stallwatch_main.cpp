// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stallwatch::cli::dispatch(argc, argv, std::cout, std::cerr); }
