#include <string>
#include <vector>

#include "curvheat/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return curvheat::run(args);
}
