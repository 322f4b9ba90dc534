#include "yaware/cli.hpp"

int main(int argc, char** argv) { return yaware::dispatch(argc, argv); }
