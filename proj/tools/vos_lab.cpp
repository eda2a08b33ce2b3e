#include "vos/cli.hpp"

int main(int argc, char** argv) { return vos::run_cli(argc, argv); }
