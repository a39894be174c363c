#include <iostream>

#include "aggreg/cli.hpp"

int main(int argc, char** argv) { return aggreg::run_cli(argc, argv, std::cout, std::cerr); }
