#include "gridfire/cli/run.hpp"

int main(int argc, char** argv) { return gridfire::cli::run(argc, argv); }
