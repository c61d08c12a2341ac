#include <iostream>

#include "dstorm/harness/cli.hpp"

int main(int argc, char** argv) { return dstorm::harness::run_cli(argc, argv, std::cout, std::cerr); }
