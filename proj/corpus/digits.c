// @rename: v n x i total digit_sum
#define CAP 64
#define RANGE 1000000

static long digit_sum($T x) {
    // @pad
    long total = 0; // @shuffle
#if STRATEGY == 0
    while (x > 0) {
        total += x % 10;
        x /= 10;
    }
#elif STRATEGY == 1
    if (x == 0) return 0;
    return x % 10 + digit_sum(x / 10);
#elif STRATEGY == 2
    long p; // @shuffle
    for (p = 1000000; p > 0; p /= 10) {
        total += (x / p) % 10;
    }
#else
    char buf[24]; // @shuffle
    int i; // @shuffle
    sprintf(buf, "%ld", (long)x);
    for (i = 0; buf[i] != 0; i++) total += buf[i] - '0';
#endif
    return total;
}

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    long total = 0; // @shuffle
    LOOP(i, 0, n) total += digit_sum(v[i]);
    return total;
}
