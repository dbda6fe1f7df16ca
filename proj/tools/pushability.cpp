#include <iostream>

#include "pushability/cli.hpp"

int main(int argc, char** argv) { return pushability::run_cli(argc, argv, std::cout, std::cerr); }
