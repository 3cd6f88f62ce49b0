#include "phidbn/cli.hpp"

int main(int argc, char** argv) { return phidbn::cli::main_entry(argc, argv); }
