#include "rfdae/cli.hpp"

int main(int argc, char** argv) { return rfdae::cli::run(argc, argv); }
