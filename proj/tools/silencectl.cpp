#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return silencectl::run(argc, argv, std::cout, std::cerr); }
