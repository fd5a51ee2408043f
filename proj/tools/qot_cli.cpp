#include <string>
#include <vector>

#include <qot/cli.hpp>

int main(int argc, char** argv) {
    return qot::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
