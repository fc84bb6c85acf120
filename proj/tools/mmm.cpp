#include <iostream>

#include "mmm/cli/commands.hpp"

int main(int argc, char** argv) { return mmm::cli::run_cli(argc, argv, std::cout, std::cerr); }
