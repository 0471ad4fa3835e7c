#include "cli.hpp"

int main(int argc, char **argv) { return gfl::cli::run(argc, argv); }
