#include "polydev/cli.hpp"

int main(int argc, char** argv) { return polydev::run_command(argc, argv); }
