#include "polar/cli.hpp"

int main(int argc, char** argv) { return polar::dispatch(argc, argv); }
