#include <iostream>

#include "tabeval_cli/commands.hpp"

int main(int argc, char** argv) { return tabeval::cli::run(argc, argv, std::cout, std::cerr); }
