#include "wetcluster/cli.hpp"

int main(int argc, char** argv) { return wetcluster::run_cli(argc, argv); }
