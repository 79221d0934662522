#include <iostream>

#include "logomon/cli.hpp"

int main(int argc, char** argv) {
  return logomon::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
