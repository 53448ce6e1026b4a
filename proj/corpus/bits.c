// @rename: v n x i count popcount table
#define CAP 64
#define RANGE 1000000

static int popcount(unsigned long x) {
    // @pad
    int count = 0; // @shuffle
#if STRATEGY == 0
    while (x != 0) {
        count += (int)(x & 1);
        x >>= 1;
    }
#elif STRATEGY == 1
    while (x != 0) {
        x &= x - 1;
        count++;
    }
#elif STRATEGY == 2
    static const int table[16] = {0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
    while (x != 0) {
        count += table[x & 15];
        x >>= 4;
    }
#else
    int i;
    LOOP(i, 0, 64) {
        if ((x >> i) & 1) count++;
    }
#endif
    return count;
}

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    long total = 0; // @shuffle
    LOOP(i, 0, n) total += popcount((unsigned long)v[i]);
    return total;
}
