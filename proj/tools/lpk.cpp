#include "lpk/cli.hpp"

int main(int argc, char** argv) { return lpk::cli::main_entry(argc, argv); }
