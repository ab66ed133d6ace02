#include <string>
#include <vector>

#include "netfuse/cli.hpp"

int main(int argc, char** argv) {
  return netfuse::cmd_dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
