void reverse(int *a, int n) {
    int i = 0;
    int j = n - 1;
    while (i < j) {
        int t = a[i];
        a[i] = a[j];
        a[j] = t;
        i++;
        j--;
    }
}

int palindrome(const int *a, int n) {
    for (int i = 0; i < n / 2; i++) {
        if (a[i] != a[n - 1 - i])
            return 0;
    }
    return 1;
}
