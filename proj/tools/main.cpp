// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "agr/harness/cli.hpp"

int main(int argc, char** argv) {
  return agr::harness::cli_dispatch(argc, argv, std::cout, std::cerr);
}
