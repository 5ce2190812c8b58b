// Command-line workbench for finite-gap curve data: period matrices, theta
// checks and solution grids.  Subcommands are wired up as the corresponding
// library modules land; see README for usage.
#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::fprintf(stderr, "fgap: not yet wired up\n");
  return 2;
}
