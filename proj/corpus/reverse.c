// @rename: v n i j tmp copy mirror
#define CAP 64
#define RANGE 1000

#if STRATEGY == 3
static void mirror($T *v, int i, int j) {
    // @pad
    $T tmp;
    if (i >= j) return;
    tmp = v[i];
    v[i] = v[j];
    v[j] = tmp;
    mirror(v, i + 1, j - 1);
}
#endif

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    int j; // @shuffle
    long sum = 0; // @shuffle
#if STRATEGY == 0
    $T tmp;
    i = 0;
    j = n - 1;
    while (i < j) {
        tmp = v[i];
        v[i] = v[j];
        v[j] = tmp;
        i++;
        j--;
    }
#elif STRATEGY == 1
    $T tmp;
    LOOP(i, 0, n / 2) {
        j = n - 1 - i;
        tmp = v[i];
        v[i] = v[j];
        v[j] = tmp;
    }
#elif STRATEGY == 2
    $T copy[CAP];
    LOOP(i, 0, n) copy[i] = v[i];
    LOOP(i, 0, n) v[i] = copy[n - 1 - i];
    j = 0;
#else
    mirror(v, 0, n - 1);
    j = 0;
#endif
    LOOP(i, 0, n) sum += (long)v[i] * (i + 1);
    return sum + j;
}
