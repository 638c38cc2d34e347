#include <iostream>

#include "drivewave/cli.hpp"

int main(int argc, char** argv) { return drivewave::run_cli(argc, argv, std::cout, std::cerr); }
