#include "golab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return golab::run_cli(argc, argv, std::cout, std::cerr); }
