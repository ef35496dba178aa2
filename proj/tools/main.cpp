#include "udw/cli.hpp"

int main(int argc, char** argv) { return udw::cli_main(argc, argv); }
