#include "mcdist/pipeline.hpp"

int main(int argc, char** argv) { return mcdist::run_cli(argc, argv); }
