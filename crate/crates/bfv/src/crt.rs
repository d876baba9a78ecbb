use num_bigint::BigUint;

/// Combines residues `r_i mod m_i` (pairwise coprime) into the unique
/// value in `[0, prod m_i)`. Returns `None` if the product exceeds `u128`
/// or the moduli are not coprime.
pub fn crt_combine(residues: &[(u64, u64)]) -> Option<u128> {
    let mut modulus = BigUint::from(1u8);
    let mut acc = BigUint::from(0u8);
    for &(r, m) in residues {
        let m_big = BigUint::from(m);
        // acc + modulus * k = r (mod m)
        let cur = (&acc % &m_big).iter_u64_digits().next().unwrap_or(0);
        let modm = (&modulus % &m_big).iter_u64_digits().next().unwrap_or(0);
        let inv = mod_inverse(modm, m)?;
        let diff = ((r % m) as u128 + m as u128 - cur as u128) % m as u128;
        let k = diff * inv as u128 % m as u128;
        acc += &modulus * BigUint::from(k);
        modulus *= m_big;
    }
    u128::try_from(acc).ok()
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combines_small_moduli() {
        let x: u128 = 123_456_789_012_345_678_901;
        let ms = [65537u64, 114689, 147457, 163841, 557057];
        let res: Vec<(u64, u64)> = ms.iter().map(|&m| ((x % m as u128) as u64, m)).collect();
        assert_eq!(crt_combine(&res), Some(x));
    }

    #[test]
    fn rejects_shared_factor() {
        assert_eq!(crt_combine(&[(1, 6), (1, 4)]), None);
    }
}
