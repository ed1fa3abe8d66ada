#include "mlgd/pipeline.hpp"

int main(int argc, char** argv) { return mlgd::run_cli(argc, argv); }
