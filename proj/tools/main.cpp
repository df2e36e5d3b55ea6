#include <iostream>
#include <string>
#include <vector>

#include "gestfuse/cli.hpp"

int main(int argc, char** argv) {
  return gestfuse::cli_run(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                           std::cerr);
}
