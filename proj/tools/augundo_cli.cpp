#include "augundo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return augundo::cli::run_cli(argc, argv, std::cout, std::cerr); }
