#include <cstdio>

int main() {
  std::puts("adrl: subcommands not wired up yet");
  return 2;
}
