// @rename: v n x d count is_prime
#define CAP 64
#define RANGE 3000

static int is_prime($T x) {
    // @pad
    $T d; // @shuffle
    if (x < 2) return 0;
#if STRATEGY == 0
    for (d = 2; d * d <= x; d++) {
        if (x % d == 0) return 0;
    }
    return 1;
#elif STRATEGY == 1
    d = 2;
    while (d < x && x % d != 0) d++;
    return d == x;
#elif STRATEGY == 2
    if (x < 4) return 1;
    if (x % 2 == 0 || x % 3 == 0) return 0;
    for (d = 5; d * d <= x; d += 6) {
        if (x % d == 0 || x % (d + 2) == 0) return 0;
    }
    return 1;
#else
    int divisors = 0;
    for (d = 1; d <= x; d++) {
        if (x % d == 0) divisors++;
    }
    return divisors == 2;
#endif
}

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    long count = 0; // @shuffle
    LOOP(i, 0, n) count += is_prime(v[i]);
    return count;
}
