#include <iostream>

#include "trc/cli_app.hpp"

int main(int argc, char** argv) {
  return trc::cli_run(argc, argv, std::cout, std::cerr);
}
