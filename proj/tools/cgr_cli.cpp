#include <iostream>

#include "cgr/cli.hpp"

int main(int argc, char** argv) { return cgr::cli::run(argc, argv, std::cout, std::cerr); }
