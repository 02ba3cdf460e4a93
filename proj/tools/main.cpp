#include <iostream>

#include "evolve/cli.hpp"

int main(int argc, char** argv) { return evolve::run_cli(argc, argv, std::cout, std::cerr); }
