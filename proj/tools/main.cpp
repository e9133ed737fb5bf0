#include "slicescope/cli.hpp"

int main(int argc, char** argv) { return slicescope::run_main(argc, argv); }
