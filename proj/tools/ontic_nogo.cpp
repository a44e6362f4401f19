#include <iostream>

#include "ontic_nogo/cli.hpp"

int main(int argc, char **argv) { return ontic_nogo::cli::run_cli(argc, argv, std::cout, std::cerr); }
