//! Computations a buyer can query, registered by id. Every computation
//! describes its garbled-circuit form; those with a homomorphic form also
//! provide an [`HeProgram`].

use std::fmt::Debug;

use dmsc_analytics::ld_circuit::ld_circuit_width;
use dmsc_analytics::ld_he::check_population;
use dmsc_analytics::{
    build_ld_circuit_multi, build_lr_circuit_multi, encode_ld_inputs, encode_lr_inputs, ld_decide_plain,
    lr_predict_plain, HaplotypeCounts, LdHeListing, LdHeOutput, LdHePlan, LdThreshold, LrModel, SigmoidTable,
};
use dmsc_analytics::ld_he::EncryptedCounts;
use dmsc_bfv::{Encoding, HeCiphertext, HeContext, PublicKey, RelinKey};
use dmsc_core::bits::from_bits;
use dmsc_core::Circuit;
use rand_chacha::ChaCha20Rng;

use crate::error::{MarketError, Result};

pub const LD_TEST: &str = "ld-test";
pub const LR_PREDICT: &str = "lr-predict";

/// One maker's private listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MakerInput {
    /// Local haplotype counts, one entry per test instance.
    Haplotypes(Vec<HaplotypeCounts>),
    /// Quantized feature rows.
    Features(Vec<Vec<i64>>),
}

/// What the buyer learns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuyerResult {
    LdDecisions(Vec<bool>),
    /// Probabilities with the model's fractional bits.
    LrProbabilities(Vec<u64>),
}

impl BuyerResult {
    pub fn len(&self) -> usize {
        match self {
            BuyerResult::LdDecisions(v) => v.len(),
            BuyerResult::LrProbabilities(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub trait Computation: Send + Sync + Debug {
    fn id(&self) -> &str;

    /// Number of makers the public parameters are laid out for.
    fn makers(&self) -> usize;

    fn check_inputs(&self, inputs: &[MakerInput]) -> Result<()>;

    /// Plaintext result on the union of the makers' inputs.
    fn oracle(&self, inputs: &[MakerInput]) -> Result<BuyerResult>;

    /// The public circuit; maker `j` owns input group `maker{j}`.
    fn circuit(&self) -> Result<Circuit>;

    /// Input bits of maker `maker`, in its group's order.
    fn maker_bits(&self, maker: usize, input: &MakerInput) -> Result<Vec<bool>>;

    fn decode_output(&self, bits: &[bool]) -> Result<BuyerResult>;

    /// Homomorphic form over the ring of `base`.
    fn he_program(&self, base: &HeContext) -> Result<Box<dyn HeProgram>> {
        let _ = base;
        Err(MarketError::Unsupported {
            backend: "he".into(),
            computation: self.id().into(),
        })
    }
}

pub trait HeProgram: Send {
    /// Contexts in the order ciphertexts appear in listings and outputs.
    fn contexts(&self) -> &[HeContext];

    fn encrypt(&self, pk: &PublicKey, input: &MakerInput, rng: &mut ChaCha20Rng) -> Result<Vec<HeCiphertext>>;

    /// `f'` over all listings, in maker order.
    fn evaluate(&self, rk: &RelinKey, listings: Vec<Vec<HeCiphertext>>) -> Result<Vec<HeCiphertext>>;

    /// Leading slots of each decrypted output the buyer needs.
    fn slots(&self) -> usize;

    /// Final result from decrypted outputs, one slot vector per output.
    fn finish(&self, values: &[Vec<u64>]) -> Result<BuyerResult>;

    fn context_for(&self, param_id: u64) -> Result<&HeContext> {
        self.contexts()
            .iter()
            .find(|c| c.param_id() == param_id)
            .ok_or_else(|| MarketError::Malformed(format!("no context for parameter id {param_id:#x}")))
    }

    fn ciphertext_from_bytes(&self, bytes: &[u8]) -> Result<HeCiphertext> {
        if bytes.len() < 14 {
            return Err(MarketError::Malformed("ciphertext too short".into()));
        }
        let id = u64::from_le_bytes(bytes[6..14].try_into().unwrap());
        Ok(self.context_for(id)?.ciphertext_from_bytes(bytes)?)
    }
}

fn dims_err(expected: usize, got: usize) -> MarketError {
    dmsc_analytics::AnalyticsError::DimensionMismatch { expected, got }.into()
}

/// Chi-square LD test over `instances` SNP pairs, counts pooled across
/// `makers`.
#[derive(Debug, Clone)]
pub struct LdComputation {
    pub instances: usize,
    pub makers: usize,
    /// Width of each maker's local counts.
    pub count_bits: usize,
    pub threshold: LdThreshold,
    /// Bound on the pooled population, used by the homomorphic plan.
    pub max_total: u64,
    /// Slot packing on the homomorphic path.
    pub batched: bool,
}

impl LdComputation {
    pub fn new(instances: usize, makers: usize, max_total: u64) -> Result<Self> {
        if instances == 0 || makers == 0 {
            return Err(MarketError::InvalidSession("need at least one instance and one maker".into()));
        }
        let count_bits = (u64::BITS - max_total.leading_zeros()) as usize;
        Ok(Self {
            instances,
            makers,
            count_bits: count_bits.max(1),
            threshold: LdThreshold::default(),
            max_total,
            batched: instances > 1,
        })
    }

    pub fn circuit_width(&self) -> usize {
        ld_circuit_width(self.count_bits, self.makers, self.threshold)
    }

    fn haplotypes<'a>(&self, input: &'a MakerInput) -> Result<&'a [HaplotypeCounts]> {
        match input {
            MakerInput::Haplotypes(c) if c.len() == self.instances => Ok(c),
            MakerInput::Haplotypes(c) => Err(dims_err(self.instances, c.len())),
            MakerInput::Features(_) => Err(MarketError::InvalidSession("LD test needs haplotype counts".into())),
        }
    }

    pub fn pooled(&self, inputs: &[MakerInput]) -> Result<Vec<HaplotypeCounts>> {
        let mut acc = vec![HaplotypeCounts::default(); self.instances];
        for input in inputs {
            for (a, c) in acc.iter_mut().zip(self.haplotypes(input)?) {
                *a = a.merge(c);
            }
        }
        Ok(acc)
    }
}

impl Computation for LdComputation {
    fn id(&self) -> &str {
        LD_TEST
    }

    fn makers(&self) -> usize {
        self.makers
    }

    fn check_inputs(&self, inputs: &[MakerInput]) -> Result<()> {
        if inputs.len() != self.makers {
            return Err(dims_err(self.makers, inputs.len()));
        }
        let pooled = self.pooled(inputs)?;
        if let Some(c) = pooled.iter().find(|c| c.total() > self.max_total) {
            return Err(MarketError::InvalidSession(format!(
                "pooled population {} exceeds the bound {}",
                c.total(),
                self.max_total
            )));
        }
        for input in inputs {
            encode_ld_inputs(self.haplotypes(input)?, self.count_bits)?;
        }
        Ok(())
    }

    fn oracle(&self, inputs: &[MakerInput]) -> Result<BuyerResult> {
        let decisions = self
            .pooled(inputs)?
            .iter()
            .map(|c| Ok(ld_decide_plain(c, self.threshold)?.decision))
            .collect::<Result<_>>()?;
        Ok(BuyerResult::LdDecisions(decisions))
    }

    fn circuit(&self) -> Result<Circuit> {
        Ok(build_ld_circuit_multi(self.count_bits, self.instances, self.makers, self.threshold)?)
    }

    fn maker_bits(&self, _maker: usize, input: &MakerInput) -> Result<Vec<bool>> {
        Ok(encode_ld_inputs(self.haplotypes(input)?, self.count_bits)?)
    }

    fn decode_output(&self, bits: &[bool]) -> Result<BuyerResult> {
        if bits.len() != self.instances {
            return Err(dims_err(self.instances, bits.len()));
        }
        Ok(BuyerResult::LdDecisions(bits.to_vec()))
    }

    fn he_program(&self, base: &HeContext) -> Result<Box<dyn HeProgram>> {
        let encoding = if self.batched || self.instances > 1 {
            Encoding::Batched
        } else {
            Encoding::Scalar
        };
        let plan = LdHePlan::new(base, self.threshold, self.max_total, encoding)?;
        if self.instances > plan.capacity() {
            return Err(dims_err(plan.capacity(), self.instances));
        }
        Ok(Box::new(LdHeProgram {
            plan,
            instances: self.instances,
        }))
    }
}

struct LdHeProgram {
    plan: LdHePlan,
    instances: usize,
}

impl HeProgram for LdHeProgram {
    fn contexts(&self) -> &[HeContext] {
        self.plan.contexts()
    }

    fn encrypt(&self, pk: &PublicKey, input: &MakerInput, rng: &mut ChaCha20Rng) -> Result<Vec<HeCiphertext>> {
        let MakerInput::Haplotypes(counts) = input else {
            return Err(MarketError::InvalidSession("LD test needs haplotype counts".into()));
        };
        check_population(&self.plan, counts)?;
        let listing = self.plan.encrypt_counts(pk, counts, rng)?;
        Ok(listing.per_modulus.into_iter().flat_map(|e| e.parts).collect())
    }

    fn evaluate(&self, rk: &RelinKey, listings: Vec<Vec<HeCiphertext>>) -> Result<Vec<HeCiphertext>> {
        let k = self.contexts().len();
        let listings = listings
            .into_iter()
            .map(|cts| {
                if cts.len() != 4 * k {
                    return Err(dims_err(4 * k, cts.len()));
                }
                let mut it = cts.into_iter();
                let per_modulus = (0..k)
                    .map(|_| EncryptedCounts {
                        parts: std::array::from_fn(|_| it.next().unwrap()),
                    })
                    .collect();
                Ok(LdHeListing { per_modulus })
            })
            .collect::<Result<Vec<_>>>()?;
        let agg = self.plan.aggregate(&listings)?;
        let LdHeOutput { per_modulus } = self.plan.evaluate(rk, &agg)?;
        Ok(per_modulus.into_iter().flat_map(|(l, r)| [l, r]).collect())
    }

    fn slots(&self) -> usize {
        self.instances
    }

    fn finish(&self, values: &[Vec<u64>]) -> Result<BuyerResult> {
        let residues: Vec<(Vec<u64>, Vec<u64>)> = values.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
        if values.len() % 2 != 0 {
            return Err(dims_err(2 * self.contexts().len(), values.len()));
        }
        let decisions = self.plan.decide(&residues, self.instances)?;
        Ok(BuyerResult::LdDecisions(decisions.into_iter().map(|d| d.decision).collect()))
    }
}

/// Logistic-regression inference with a public model. Maker `j` holds
/// `rows_per_maker[j]` quantized rows.
#[derive(Debug, Clone)]
pub struct LrComputation {
    pub model: LrModel,
    pub table: SigmoidTable,
    pub rows_per_maker: Vec<usize>,
}

impl LrComputation {
    pub fn new(model: LrModel, table: SigmoidTable, rows_per_maker: Vec<usize>) -> Result<Self> {
        if rows_per_maker.is_empty() || rows_per_maker.iter().sum::<usize>() == 0 {
            return Err(MarketError::InvalidSession("need at least one row".into()));
        }
        if table.spec() != model.spec {
            return Err(MarketError::InvalidSession("model and table use different fixed-point specs".into()));
        }
        Ok(Self {
            model,
            table,
            rows_per_maker,
        })
    }

    fn rows<'a>(&self, maker: usize, input: &'a MakerInput) -> Result<&'a [Vec<i64>]> {
        let want = self.rows_per_maker.get(maker).copied().ok_or_else(|| dims_err(self.rows_per_maker.len(), maker + 1))?;
        match input {
            MakerInput::Features(r) if r.len() == want => {
                if let Some(bad) = r.iter().find(|row| row.len() != self.model.dims()) {
                    return Err(dims_err(self.model.dims(), bad.len()));
                }
                Ok(r)
            }
            MakerInput::Features(r) => Err(dims_err(want, r.len())),
            MakerInput::Haplotypes(_) => Err(MarketError::InvalidSession("LR inference needs feature rows".into())),
        }
    }
}

impl Computation for LrComputation {
    fn id(&self) -> &str {
        LR_PREDICT
    }

    fn makers(&self) -> usize {
        self.rows_per_maker.len()
    }

    fn check_inputs(&self, inputs: &[MakerInput]) -> Result<()> {
        if inputs.len() != self.makers() {
            return Err(dims_err(self.makers(), inputs.len()));
        }
        let spec = self.model.spec;
        for (j, input) in inputs.iter().enumerate() {
            for row in self.rows(j, input)? {
                if let Some(&v) = row.iter().find(|&&v| !spec.fits(v)) {
                    return Err(MarketError::InvalidSession(format!(
                        "feature {v} does not fit {} bits",
                        spec.total_bits()
                    )));
                }
            }
        }
        Ok(())
    }

    fn oracle(&self, inputs: &[MakerInput]) -> Result<BuyerResult> {
        let mut probs = Vec::new();
        for (j, input) in inputs.iter().enumerate() {
            for row in self.rows(j, input)? {
                probs.push(lr_predict_plain(&self.model, &self.table, row)?.prob_raw);
            }
        }
        Ok(BuyerResult::LrProbabilities(probs))
    }

    fn circuit(&self) -> Result<Circuit> {
        Ok(build_lr_circuit_multi(&self.model, &self.table, &self.rows_per_maker)?)
    }

    fn maker_bits(&self, maker: usize, input: &MakerInput) -> Result<Vec<bool>> {
        let rows = self.rows(maker, input)?;
        Ok(rows.iter().flat_map(|r| encode_lr_inputs(self.model.spec, r)).collect())
    }

    fn decode_output(&self, bits: &[bool]) -> Result<BuyerResult> {
        let w = self.table.out_bits();
        let rows: usize = self.rows_per_maker.iter().sum();
        if bits.len() != rows * w {
            return Err(dims_err(rows * w, bits.len()));
        }
        Ok(BuyerResult::LrProbabilities(bits.chunks(w).map(|c| from_bits(c) as u64).collect()))
    }
}
