#include <iostream>

#include "levystop/cli.hpp"

int main(int argc, char** argv) { return levystop::run_cli(argc, argv, std::cout, std::cerr); }
