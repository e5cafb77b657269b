#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <string>

extern std::string g_cli_binary;

int main(int argc, char** argv) {
  // ctest hands the tool path to test_cli as the one positional argument;
  // peel it off before doctest sees the command line.
  int kept = 1;
  for (int i = 1; i < argc; ++i) {
    if (argv[i][0] != '-') {
      g_cli_binary = argv[i];
    } else {
      argv[kept++] = argv[i];
    }
  }
  doctest::Context context;
  context.applyCommandLine(kept, argv);
  return context.run();
}
