#include <iostream>

#include "sqvdlm/cli.hpp"

int main(int argc, char** argv) { return sqvdlm::cli::run(argc, argv, std::cout, std::cerr); }
