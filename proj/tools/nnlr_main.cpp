#include <iostream>

#include "nnlr/cli.hpp"

int main(int argc, char** argv) { return nnlr::run_cli(argc, argv, std::cout, std::cerr); }
