#include <iostream>

#include "marketlcp/cli.hpp"

int main(int argc, char** argv) { return marketlcp::run_cli(argc, argv, std::cout, std::cerr); }
