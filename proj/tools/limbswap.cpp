#include <iostream>

#include "limbswap/cli.hpp"

int main(int argc, char** argv) { return limbswap::cli_main(argc, argv, std::cout, std::cerr); }
