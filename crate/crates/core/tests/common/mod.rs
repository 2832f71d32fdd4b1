//! Reference computations written straight from the definitions, sharing no
//! code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

/// Mixed-radix digits of `idx`, last coordinate fastest.
pub fn coords(orders: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; orders.len()];
    for j in (0..orders.len()).rev() {
        out[j] = idx % orders[j];
        idx /= orders[j];
    }
    out
}

pub fn index(orders: &[usize], c: &[usize]) -> usize {
    c.iter().zip(orders).fold(0, |acc, (&x, &d)| acc * d + x % d)
}

pub fn order(orders: &[usize]) -> usize {
    orders.iter().product()
}

pub fn add(orders: &[usize], a: usize, b: usize) -> usize {
    let (ca, cb) = (coords(orders, a), coords(orders, b));
    let s: Vec<usize> = ca.iter().zip(&cb).zip(orders).map(|((x, y), d)| (x + y) % d).collect();
    index(orders, &s)
}

pub fn sub(orders: &[usize], a: usize, b: usize) -> usize {
    let (ca, cb) = (coords(orders, a), coords(orders, b));
    let s: Vec<usize> = ca.iter().zip(&cb).zip(orders).map(|((x, y), d)| (x + d - y) % d).collect();
    index(orders, &s)
}

/// `chi(g) = exp(2 pi i sum chi_j g_j / d_j)`.
pub fn character(orders: &[usize], chi: usize, g: usize) -> C64 {
    let (a, x) = (coords(orders, chi), coords(orders, g));
    let t: f64 = a.iter().zip(&x).zip(orders).map(|((a, x), &d)| (a * x) as f64 / d as f64).sum();
    C64::from_polar(1.0, 2.0 * PI * t)
}

/// `Q(g, chi) = <b_chi|a_g><a_g|C|b_chi>` with `b_chi(x) = chi(x) / sqrt N`.
pub fn kd_table(orders: &[usize], c: &[C64]) -> Vec<C64> {
    let n = order(orders);
    let s = 1.0 / (n as f64).sqrt();
    let b: Vec<C64> = (0..n * n).map(|k| character(orders, k / n, k % n) * s).collect();
    let mut q = vec![C64::new(0.0, 0.0); n * n];
    for g in 0..n {
        for chi in 0..n {
            let row: C64 = (0..n).map(|x| c[g * n + x] * b[chi * n + x]).sum();
            q[g * n + chi] = b[chi * n + g].conj() * row;
        }
    }
    q
}

/// `Tr(C^dagger D)`.
pub fn frobenius(c: &[C64], d: &[C64]) -> C64 {
    c.iter().zip(d).map(|(a, b)| a.conj() * b).sum()
}

pub fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn adjoint(n: usize, a: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Matrix of `psi -> chi0(.) psi(. - g0)`.
pub fn weyl_matrix(orders: &[usize], g0: usize, chi0: usize) -> Vec<C64> {
    let n = order(orders);
    let mut u = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        u[x * n + sub(orders, x, g0)] = character(orders, chi0, x);
    }
    u
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Number of subgroups, by testing every subset containing 0 for closure.
pub fn subgroup_count(orders: &[usize]) -> usize {
    let n = order(orders);
    assert!(n <= 20, "brute force only");
    if n == 1 {
        return 1;
    }
    let table: Vec<usize> = (0..n * n).map(|k| add(orders, k / n, k % n)).collect();
    let mut count = 0;
    for rest in 0u32..(1 << (n - 1)) {
        let mask = 1 | (rest << 1);
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if members.iter().all(|&a| members.iter().all(|&b| mask >> table[a * n + b] & 1 == 1)) {
            count += 1;
        }
    }
    count
}

/// Factor lists (nondecreasing, each >= 2) with product at most `max`, plus the trivial group.
pub fn groups_up_to(max: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, product: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        let lo = prefix.last().copied().unwrap_or(2);
        for d in lo..=max / product {
            prefix.push(d);
            out.push(prefix.clone());
            extend(prefix, product * d, max, out);
            prefix.pop();
        }
    }
    let mut out = vec![vec![1]];
    extend(&mut Vec::new(), 1, max, &mut out);
    out.sort_by_key(|o| (order(o), o.clone()));
    out
}
