#include <iostream>

#include "tlsgate/cli.hpp"

int main(int argc, char** argv) { return tlsgate::run_cli(argc, argv, std::cout, std::cerr); }
