#include <iostream>

#include "glasd/cli.hpp"

int main(int argc, char** argv) { return glasd::run_cli(argc, argv, std::cout, std::cerr); }
