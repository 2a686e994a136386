#include "fo2/cli.hpp"

int main(int argc, char** argv) { return fo2::cli_main(argc, argv); }
