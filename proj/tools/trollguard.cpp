#include "trollguard/cli.hpp"

int main(int argc, char** argv) { return trollguard::cli::dispatch(argc, argv); }
