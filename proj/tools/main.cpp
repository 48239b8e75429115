#include "minimax_curve/cli.hpp"

int main(int argc, char** argv) { return minimax_curve::run_cli(argc, argv); }
