#include "tbrw/cli.hpp"

int main(int argc, char** argv) { return tbrw::run_cli(argc, argv); }
