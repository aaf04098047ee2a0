//! Row reduction over `Z/p`.

fn inv_mod(a: u32, p: u32) -> u32 {
    // p is a small prime: Fermat
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Reduced row echelon form of the nonzero row space.
pub fn rref(rows: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut lead = 0;
    for c in 0..cols {
        let Some(piv) = (lead..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(lead, piv);
        let inv = inv_mod(m[lead][c], p);
        for x in m[lead].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != lead && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    m[r][k] = (m[r][k] + p * p - f * m[lead][k] % p) % p;
                }
            }
        }
        lead += 1;
        if lead == m.len() {
            break;
        }
    }
    m.truncate(lead);
    m
}

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    rref(rows, p).len()
}

/// Whether `v` lies in the row space of `rows`.
pub fn in_span(rows: &[Vec<u32>], v: &[u32], p: u32) -> bool {
    let base = rank(rows, p);
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(&ext, p) == base
}

/// Basis of `{x : rows · x = 0}` (right kernel).
pub fn kernel(rows: &[Vec<u32>], cols: usize, p: u32) -> Vec<Vec<u32>> {
    let r = rref(rows, p);
    let mut pivots = Vec::new();
    for row in &r {
        pivots.push(row.iter().position(|&x| x != 0).unwrap());
    }
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = (p - row[free] % p) % p;
        }
        out.push(v);
    }
    out
}

/// Some `μ` with `Σ μ_i · columns[i] = target`, if one exists.
pub fn solve(columns: &[Vec<u32>], target: &[u32], p: u32) -> Option<Vec<u32>> {
    let m = columns.len();
    let rows: Vec<Vec<u32>> = (0..target.len())
        .map(|r| {
            let mut row: Vec<u32> = columns.iter().map(|c| c[r] % p).collect();
            row.push(target[r] % p);
            row
        })
        .collect();
    let red = rref(&rows, p);
    let mut out = vec![0u32; m];
    for row in &red {
        let lead = row.iter().position(|&x| x != 0).unwrap();
        if lead == m {
            return None;
        }
        out[lead] = row[m];
    }
    Some(out)
}
