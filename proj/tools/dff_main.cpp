#include <cstdio>

int main() {
  std::printf("dff: CLI wiring pending\n");
  return 0;
}
