#include "memcurse/cli/cli.hpp"

int main(int argc, char** argv) { return memcurse::cli::run(argc, argv); }
