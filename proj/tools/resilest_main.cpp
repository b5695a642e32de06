#include <iostream>

#include "resilest/cli.hpp"

int main(int argc, char** argv) { return resilest::run_cli(argc, argv, std::cout, std::cerr); }
