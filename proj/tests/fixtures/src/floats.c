#include <math.h>
#include <stdio.h>

int main(int argc, char **argv) {
    double acc = 0.0;
    for (int i = 1; i <= 10 * argc; ++i) acc += sqrt((double)i) / (i + 0.5);
    float f = (float)acc;
    printf("%.3f %s\n", f, argv[0]);
    return 0;
}
