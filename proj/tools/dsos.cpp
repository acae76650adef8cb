#include <iostream>

#include "dsos/cli.hpp"

int main(int argc, char** argv) { return dsos::cli::run(argc, argv, std::cout, std::cerr); }
