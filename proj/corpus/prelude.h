#include <stdio.h>

#ifndef LOOP_STYLE
#define LOOP_STYLE 0
#endif

#if LOOP_STYLE == 0
#define LOOP(i, lo, hi) for ((i) = (lo); (i) < (hi); (i)++)
#elif LOOP_STYLE == 1
#define LOOP(i, lo, hi) for ((i) = (lo); (hi) > (i); (i) += 1)
#else
#define LOOP(i, lo, hi) for ((i) = (lo) - 1; ++(i) < (hi);)
#endif

static unsigned long lcg_state = SEED;

static unsigned long next_rand(void) {
    lcg_state = lcg_state * 6364136223846793005UL + 1442695040888963407UL;
    return lcg_state >> 33;
}
