#include "idft/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return idft::run_cli(argc, argv, std::cout, std::cerr); }
