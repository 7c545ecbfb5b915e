// Scenario runner CLI; subcommands wired up in runner.hpp as modules land.
#include <cstdio>

int main() {
    std::puts("svp_run: scenarios not wired yet");
    return 2;
}
