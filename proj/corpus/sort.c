// @rename: v n i j tmp pass best
#define CAP 64
#define RANGE 1000

static long solve($T *v, int n) {
    // @pad
    int i; // @shuffle
    int j; // @shuffle
    $T tmp; // @shuffle
    long sum = 0; // @shuffle
#if STRATEGY == 0
    int pass;
    LOOP(pass, 0, n) {
        LOOP(j, 0, n - 1 - pass) {
            if (v[j] > v[j + 1]) {
                tmp = v[j];
                v[j] = v[j + 1];
                v[j + 1] = tmp;
            }
        }
    }
#elif STRATEGY == 1
    LOOP(i, 1, n) {
        tmp = v[i];
        j = i - 1;
        while (j >= 0 && v[j] > tmp) {
            v[j + 1] = v[j];
            j--;
        }
        v[j + 1] = tmp;
    }
#elif STRATEGY == 2
    int best;
    LOOP(i, 0, n - 1) {
        best = i;
        LOOP(j, i + 1, n) {
            if (v[j] < v[best]) best = j;
        }
        tmp = v[i];
        v[i] = v[best];
        v[best] = tmp;
    }
#else
    i = 1;
    while (i < n) {
        if (i == 0 || v[i - 1] <= v[i]) {
            i++;
        } else {
            tmp = v[i];
            v[i] = v[i - 1];
            v[i - 1] = tmp;
            i--;
        }
    }
#endif
    LOOP(i, 0, n) sum += (long)v[i] * (i + 1);
    return sum;
}
