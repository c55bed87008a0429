#include <iostream>

#include "flarelab/cli.hpp"

int main(int argc, char** argv) { return flarelab::run_cli(argc, argv, std::cout, std::cerr); }
