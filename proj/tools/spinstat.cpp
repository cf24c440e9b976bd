#include <iostream>

#include "spinstat/cli.hpp"

int main(int argc, char** argv) {
  return spinstat::cli::dispatch(argc, argv, std::cout, std::cerr);
}
