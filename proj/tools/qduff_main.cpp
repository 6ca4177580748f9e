#include <iostream>

#include "qduff/cli.hpp"

int main(int argc, char** argv) { return qduff::cli_dispatch(argc, argv, std::cout, std::cerr); }
