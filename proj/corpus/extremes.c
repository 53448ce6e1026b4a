// @rename: v n i lo hi best worst
#define CAP 64
#define RANGE 100000

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    $T lo; // @shuffle
    $T hi; // @shuffle
#if STRATEGY == 0
    lo = v[0];
    hi = v[0];
    LOOP(i, 1, n) {
        if (v[i] < lo) lo = v[i];
        if (v[i] > hi) hi = v[i];
    }
#elif STRATEGY == 1
    lo = v[0];
    LOOP(i, 1, n) {
        if (v[i] < lo) lo = v[i];
    }
    hi = v[0];
    LOOP(i, 1, n) {
        if (v[i] > hi) hi = v[i];
    }
#elif STRATEGY == 2
    int best = 0; // @shuffle
    int worst = 0; // @shuffle
    LOOP(i, 1, n) {
        best = v[i] > v[best] ? i : best;
        worst = v[i] < v[worst] ? i : worst;
    }
    lo = v[worst];
    hi = v[best];
#else
    lo = v[0];
    hi = v[0];
    for (i = 1; i + 1 < n; i += 2) {
        if (v[i] < v[i + 1]) {
            if (v[i] < lo) lo = v[i];
            if (v[i + 1] > hi) hi = v[i + 1];
        } else {
            if (v[i + 1] < lo) lo = v[i + 1];
            if (v[i] > hi) hi = v[i];
        }
    }
    if (i < n) {
        if (v[i] < lo) lo = v[i];
        if (v[i] > hi) hi = v[i];
    }
#endif
    return (long)hi * 1000003L + (long)lo;
}
