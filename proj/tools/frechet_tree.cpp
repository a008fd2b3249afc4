#include <iostream>

#include "frechet_tree/cli.hpp"

int main(int argc, char** argv) { return frechet_tree::run_cli(argc, argv, std::cout, std::cerr); }
