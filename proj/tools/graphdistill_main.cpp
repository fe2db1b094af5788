#include <string>
#include <vector>

#include "gd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gd::cli_run(args);
}
