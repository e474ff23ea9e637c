#include "selfsim/cli.hpp"

int main(int argc, char** argv) { return selfsim::run_command(argc, argv); }
