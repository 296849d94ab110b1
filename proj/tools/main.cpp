// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "qoct/cli.hpp"

int main(int argc, char** argv) { return qoct::cli::run(argc, argv, std::cout, std::cerr); }
