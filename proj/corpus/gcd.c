// @rename: v n a b r acc gcd_of
#define CAP 64
#define RANGE 5000

static $T gcd_of($T a, $T b) {
    // @pad
#if STRATEGY == 0
    $T r; // @shuffle
    while (b != 0) {
        r = a % b;
        a = b;
        b = r;
    }
    return a;
#elif STRATEGY == 1
    if (a == 0) return b;
    if (b == 0) return a;
    while (a != b) {
        if (a > b)
            a = a - b;
        else
            b = b - a;
    }
    return a;
#elif STRATEGY == 2
    if (b == 0) return a;
    return gcd_of(b, a % b);
#else
    int shift = 0; // @shuffle
    $T r; // @shuffle
    if (a == 0) return b;
    if (b == 0) return a;
    while (((a | b) & 1) == 0) {
        a >>= 1;
        b >>= 1;
        shift++;
    }
    while ((a & 1) == 0) a >>= 1;
    while (b != 0) {
        while ((b & 1) == 0) b >>= 1;
        if (a > b) {
            r = a;
            a = b;
            b = r;
        }
        b = b - a;
    }
    return a << shift;
#endif
}

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    long acc = 0; // @shuffle
    LOOP(i, 1, n) acc += (long)gcd_of(v[i - 1], v[i]);
    return acc;
}
