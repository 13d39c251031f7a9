#include <iostream>

#include "nlcouple/cli.hpp"

int main(int argc, char** argv) { return nlc::cli::run(argc, argv, std::cout, std::cerr); }
