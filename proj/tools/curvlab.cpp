#include "cli/runner.hpp"

#include <iostream>

int main(int argc, char** argv) { return curvlab::cli::cli_main(argc, argv, std::cout, std::cerr); }
