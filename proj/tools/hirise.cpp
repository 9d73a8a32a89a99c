#include "hirise/cli.hpp"

int main(int argc, char** argv) { return hirise::run_cli(argc, argv); }
