#ifndef NOISE_MASK
#define NOISE_MASK 0
#endif

#if NOISE_MASK & 1
static long clamp_value(long v, long lo, long hi) {
    if (v < lo) return lo;
    if (v > hi) return hi;
    return v;
}
#endif

#if NOISE_MASK & 2
static unsigned long mix_bits(unsigned long h, unsigned long v) {
    h ^= v + 0x9e3779b9UL + (h << 6) + (h >> 2);
    return h;
}
#endif

#if NOISE_MASK & 4
static int abs_diff(int a, int b) { return a > b ? a - b : b - a; }
#endif

#if NOISE_MASK & 8
static void report(const char *tag, long v) { printf("%s=%ld\n", tag, v); }
#endif

static long noise(long x) {
    long acc = x;
#if NOISE_MASK & 1
    acc = clamp_value(acc, -1000000, 1000000);
#endif
#if NOISE_MASK & 2
    acc = (long)mix_bits((unsigned long)acc, 17);
#endif
#if NOISE_MASK & 4
    acc += abs_diff((int)acc, 3);
#endif
#if NOISE_MASK & 8
    report("noise", acc);
#endif
    return acc;
}
