//! Lexicographic subset enumeration.

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The `2^(n-1) - 1` bipartitions of `0..n`, each given by its smaller side
/// (ties broken by the side without the last site), sorted by size and then
/// lexicographically.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=n / 2 {
        for s in combinations(n, size) {
            if 2 * size == n && s.contains(&(n - 1)) {
                continue;
            }
            out.push(s);
        }
    }
    out
}

/// True when every element of `small` appears in the sorted slice `big`.
pub fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}
