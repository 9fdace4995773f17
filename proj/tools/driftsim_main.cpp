#include "driftsim/harness.hpp"

int main(int argc, char** argv) { return driftsim::run_cli(argc, argv); }
