int main(void) {
    // @pad
    $T input[CAP]; // @shuffle
    int i; // @shuffle
    long result; // @shuffle
    LOOP(i, 0, $N) input[i] = ($T)(1 + next_rand() % RANGE);
    result = solve(input, $N);
    printf("%ld\n", noise(result));
    return 0;
}
