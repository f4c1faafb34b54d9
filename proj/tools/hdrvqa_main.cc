#include "hdrvqa/cli.h"

int main(int argc, char** argv) { return hdrvqa::cli::run(argc, argv); }
