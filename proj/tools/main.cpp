#include "stableid/cli.hpp"

int main(int argc, char** argv) { return stableid::cli_main(argc, argv); }
