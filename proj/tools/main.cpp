#include <iostream>

#include "edmlp/cli.hpp"

int main(int argc, char** argv) { return edmlp::run_cli(argc, argv, std::cout, std::cerr); }
