#include "fruitwm/cli.hpp"

int main(int argc, char** argv)
{
  return fruitwm::run_cli(argc, argv);
}
