// @rename: v n key lo hi mid found
#define CAP 64
#define RANGE 50

static int find($T *v, int n, $T key) {
    // @pad
#if STRATEGY == 0
    int lo = 0; // @shuffle
    int hi = n - 1; // @shuffle
    int mid; // @shuffle
    while (lo <= hi) {
        mid = lo + (hi - lo) / 2;
        if (v[mid] == key) return mid;
        if (v[mid] < key)
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
#elif STRATEGY == 1
    int lo;
    LOOP(lo, 0, n) {
        if (v[lo] == key) return lo;
    }
    return -1;
#elif STRATEGY == 2
    int lo = 0; // @shuffle
    int hi = n; // @shuffle
    int mid; // @shuffle
    while (lo < hi) {
        mid = (lo + hi) >> 1;
        if (v[mid] < key)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo < n && v[lo] == key ? lo : -1;
#else
    int lo = 0; // @shuffle
    int step = 8; // @shuffle
    while (lo + step < n && v[lo + step] < key) lo += step;
    while (lo < n && v[lo] < key) lo++;
    return lo < n && v[lo] == key ? lo : -1;
#endif
}

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    long found = 0; // @shuffle
    LOOP(i, 1, n) v[i] = v[i - 1] + v[i];
    LOOP(i, 0, 16) found += find(v, n, v[next_rand() % n] + (i & 1));
    return found;
}
