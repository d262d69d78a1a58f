#include "c4out/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  std::ios::sync_with_stdio(false);
  return c4out::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
