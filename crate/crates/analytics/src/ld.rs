//! Linkage-disequilibrium chi-square test on haplotype counts.

use num_rational::Ratio;

use crate::error::{AnalyticsError, Result};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HaplotypeCounts {
    pub n_AB: u64,
    pub n_Ab: u64,
    pub n_aB: u64,
    pub n_ab: u64,
}

impl HaplotypeCounts {
    #[allow(non_snake_case)]
    pub fn new(n_AB: u64, n_Ab: u64, n_aB: u64, n_ab: u64) -> Self {
        Self { n_AB, n_Ab, n_aB, n_ab }
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.n_AB, self.n_Ab, self.n_aB, self.n_ab]
    }

    pub fn from_array(a: [u64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn total(&self) -> u64 {
        self.as_array().iter().sum()
    }

    #[allow(non_snake_case)]
    pub fn N_A(&self) -> u64 {
        self.n_AB + self.n_Ab
    }

    #[allow(non_snake_case)]
    pub fn N_a(&self) -> u64 {
        self.n_aB + self.n_ab
    }

    #[allow(non_snake_case)]
    pub fn N_B(&self) -> u64 {
        self.n_AB + self.n_aB
    }

    #[allow(non_snake_case)]
    pub fn N_b(&self) -> u64 {
        self.n_Ab + self.n_ab
    }

    /// Element-wise sum, used to aggregate makers' local counts.
    pub fn merge(&self, other: &Self) -> Self {
        let (a, b) = (self.as_array(), other.as_array());
        Self::from_array([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }

    fn check_margins(&self) -> Result<()> {
        for (name, v) in [
            ("N_A", self.N_A()),
            ("N_a", self.N_a()),
            ("N_B", self.N_B()),
            ("N_b", self.N_b()),
        ] {
            if v == 0 {
                return Err(AnalyticsError::ZeroMargin(name));
            }
        }
        Ok(())
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenotypeCounts {
    pub n_AA: u64,
    pub n_Aa: u64,
    pub n_aa: u64,
}

/// `(N_A, N_a, N)` allele counts for a single locus.
pub fn genotype_to_allele_counts(g: &GenotypeCounts) -> Result<(u64, u64, u64)> {
    let individuals = g.n_AA + g.n_Aa + g.n_aa;
    if individuals == 0 {
        return Err(AnalyticsError::EmptyPopulation);
    }
    let upper = 2 * g.n_AA + g.n_Aa;
    let lower = 2 * g.n_aa + g.n_Aa;
    Ok((upper, lower, 2 * individuals))
}

/// Allele frequencies `(p_A, p_a)` as exact rationals.
pub fn allele_frequencies(g: &GenotypeCounts) -> Result<(Ratio<i128>, Ratio<i128>)> {
    let (a, b, n) = genotype_to_allele_counts(g)?;
    Ok((Ratio::new(a as i128, n as i128), Ratio::new(b as i128, n as i128)))
}

/// Chi-square threshold as an exact rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LdThreshold {
    pub num: u64,
    pub den: u64,
}

impl LdThreshold {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(AnalyticsError::BadThreshold);
        }
        Ok(Self { num, den })
    }
}

impl Default for LdThreshold {
    /// Chi-square critical value at one degree of freedom, p = 0.05.
    fn default() -> Self {
        Self { num: 3841, den: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdResult {
    /// `2N (N n_AB - N_A N_B)^2`.
    pub lhs: u128,
    /// `N_A N_a N_B N_b`.
    pub margin_product: u128,
    /// `lhs * den`, the left side of the integer rule.
    pub scaled_lhs: u128,
    /// `num * N_A N_a N_B N_b`, the right side of the integer rule.
    pub scaled_rhs: u128,
    pub chi_square: Ratio<i128>,
    pub d_coefficient: Ratio<i128>,
    pub decision: bool,
}

/// Signed `N n_AB - N_A N_B`.
pub fn ld_difference(c: &HaplotypeCounts) -> i128 {
    c.total() as i128 * c.n_AB as i128 - c.N_A() as i128 * c.N_B() as i128
}

/// Exact evaluation of the decision rule
/// `2N (N n_AB - N_A N_B)^2 * den > num * N_A N_a N_B N_b`.
pub fn ld_decide_plain(c: &HaplotypeCounts, threshold: LdThreshold) -> Result<LdResult> {
    c.check_margins()?;
    let n = c.total() as u128;
    let diff = ld_difference(c);
    let lhs = 2 * n * (diff * diff) as u128;
    let margin_product = c.N_A() as u128 * c.N_a() as u128 * c.N_B() as u128 * c.N_b() as u128;
    let scaled_lhs = lhs * threshold.den as u128;
    let scaled_rhs = threshold.num as u128 * margin_product;
    let n2 = (n * n) as i128;
    Ok(LdResult {
        lhs,
        margin_product,
        scaled_lhs,
        scaled_rhs,
        chi_square: Ratio::new(lhs as i128, margin_product as i128),
        d_coefficient: Ratio::new(diff, n2),
        decision: scaled_lhs > scaled_rhs,
    })
}

/// Floating-point chi-square, for comparison against the exact rule.
pub fn chi_square_f64(c: &HaplotypeCounts) -> f64 {
    let n = c.total() as f64;
    let diff = n * c.n_AB as f64 - c.N_A() as f64 * c.N_B() as f64;
    2.0 * n * diff * diff / (c.N_A() as f64 * c.N_a() as f64 * c.N_B() as f64 * c.N_b() as f64)
}
