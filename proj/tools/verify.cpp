#include <iostream>

#include "locrel/checks.hpp"

int main(int argc, char** argv) {
  return locrel::cli_main(argc, argv, std::cout, std::cerr);
}
