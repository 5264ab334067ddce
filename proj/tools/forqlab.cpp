#include <iostream>

#include "forqlab/cli_io.hpp"

int main(int argc, char** argv) { return forqlab::run_cli(argc, argv, std::cout, std::cerr); }
