#include "wildannot/cli.hpp"

int main(int argc, char** argv) { return wildannot::run_cli(argc, argv); }
