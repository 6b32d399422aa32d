#include <string>
#include <vector>

#include "topoeval/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return topoeval::cli::run(args);
}
