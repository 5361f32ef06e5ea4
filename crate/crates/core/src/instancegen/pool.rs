use crate::domain::{Category, Day, Patient, PatientId};
use crate::error::{Error, Result};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Finite distribution over positive integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    pub values: Vec<u32>,
    pub weights: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(values: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        let d = DiscreteDist { values, weights };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(values: Vec<u32>) -> Self {
        let weights = vec![1.0; values.len()];
        DiscreteDist { values, weights }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(Error::InvalidParameter(format!(
                "distribution has {} values and {} weights",
                self.values.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) || self.weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter("distribution weights must be nonnegative with positive sum".into()));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.values.iter().zip(&self.weights).map(|(&v, w)| v as f64 * w).sum::<f64>() / total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        // Validated weights always build; the fallback never fires.
        match WeightedIndex::new(&self.weights) {
            Ok(index) => self.values[index.sample(rng)],
            Err(_) => self.values[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryProfile {
    pub fractions: DiscreteDist,
    pub fraction_blocks: DiscreteDist,
    /// Business days between admission and ready day.
    pub ready_offset: DiscreteDist,
}

impl CategoryProfile {
    /// Expected blocks per patient, fraction count and length drawn independently.
    pub fn expected_blocks(&self) -> f64 {
        self.fractions.mean() * self.fraction_blocks.mean()
    }
}

/// Treatment-plan pool the synthetic arrivals are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientPool {
    pub category_weights: BTreeMap<Category, f64>,
    pub profiles: BTreeMap<Category, CategoryProfile>,
}

impl Default for PatientPool {
    fn default() -> Self {
        let palliative_blocks = DiscreteDist { values: vec![2, 3, 4, 5], weights: vec![0.2, 0.3, 0.3, 0.2] };
        let curative_blocks = DiscreteDist { values: vec![3, 5, 6, 9, 12], weights: vec![0.15, 0.5, 0.15, 0.1, 0.1] };
        let curative_fractions =
            DiscreteDist { values: vec![5, 15, 20, 25, 30, 33], weights: vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1] };
        let curative_ready = DiscreteDist::uniform(vec![5, 6, 7]);
        let profiles = BTreeMap::from([
            (
                Category::P1,
                CategoryProfile {
                    fractions: DiscreteDist::uniform(vec![1, 2, 3]),
                    fraction_blocks: palliative_blocks.clone(),
                    ready_offset: DiscreteDist::uniform(vec![0]),
                },
            ),
            (
                Category::P2,
                CategoryProfile {
                    fractions: DiscreteDist::uniform(vec![1, 2, 3, 4, 5]),
                    fraction_blocks: palliative_blocks,
                    ready_offset: DiscreteDist::uniform(vec![0, 1, 2]),
                },
            ),
            (
                Category::P3,
                CategoryProfile {
                    fractions: curative_fractions.clone(),
                    fraction_blocks: curative_blocks.clone(),
                    ready_offset: curative_ready.clone(),
                },
            ),
            (
                Category::P4,
                CategoryProfile {
                    fractions: curative_fractions,
                    fraction_blocks: curative_blocks,
                    ready_offset: curative_ready,
                },
            ),
        ]);
        let category_weights = BTreeMap::from([
            (Category::P1, 0.0044),
            (Category::P2, 0.2714),
            (Category::P3, 0.4136),
            (Category::P4, 0.3106),
        ]);
        PatientPool { category_weights, profiles }
    }
}

impl PatientPool {
    pub fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for category in Category::ALL {
            let w = *self
                .category_weights
                .get(&category)
                .ok_or_else(|| Error::InvalidParameter(format!("pool has no weight for {category}")))?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!("weight for {category} is {w}")));
            }
            sum += w;
            let profile = self.profile(category)?;
            for dist in [&profile.fractions, &profile.fraction_blocks, &profile.ready_offset] {
                dist.validate()?;
            }
            // Every support point must produce a valid patient.
            for &fractions in &profile.fractions.values {
                for &blocks in &profile.fraction_blocks.values {
                    for &offset in &profile.ready_offset.values {
                        Patient::new(PatientId(0), category, 0, 0, offset, fractions, blocks)?;
                    }
                }
            }
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!("category weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    pub fn profile(&self, category: Category) -> Result<&CategoryProfile> {
        self.profiles
            .get(&category)
            .ok_or_else(|| Error::InvalidParameter(format!("pool has no profile for {category}")))
    }

    pub fn weight(&self, category: Category) -> f64 {
        self.category_weights.get(&category).copied().unwrap_or(0.0)
    }

    /// Mean blocks `p * I` of a random arrival.
    pub fn expected_blocks_per_patient(&self) -> f64 {
        Category::ALL.iter().filter_map(|&c| self.profiles.get(&c).map(|p| self.weight(c) * p.expected_blocks())).sum()
    }

    pub fn sample_category<R: Rng + ?Sized>(&self, rng: &mut R) -> Category {
        let weights: Vec<f64> = Category::ALL.iter().map(|&c| self.weight(c)).collect();
        match WeightedIndex::new(&weights) {
            Ok(index) => Category::ALL[index.sample(rng)],
            Err(_) => Category::P3,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pool: PatientPool = serde_json::from_str(text)?;
        pool.validate()?;
        Ok(pool)
    }
}

/// Draws one patient admitted on `day` as the `seq`-th arrival of that day.
pub fn sample_patient<R: Rng + ?Sized>(
    pool: &PatientPool,
    category: Option<Category>,
    id: PatientId,
    day: Day,
    seq: u32,
    rng: &mut R,
) -> Result<Patient> {
    let category = category.unwrap_or_else(|| pool.sample_category(rng));
    let profile = pool.profile(category)?;
    let fractions = profile.fractions.sample(rng);
    let blocks = profile.fraction_blocks.sample(rng);
    let offset = profile.ready_offset.sample(rng);
    Patient::new(id, category, day, seq, offset, fractions, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_pool_is_valid() {
        PatientPool::default().validate().unwrap();
    }

    #[test]
    fn expected_blocks_by_hand() {
        let pool = PatientPool::default();
        let p_pal = 0.2 * 2.0 + 0.3 * 3.0 + 0.3 * 4.0 + 0.2 * 5.0;
        let p_cur = 0.15 * 3.0 + 0.5 * 5.0 + 0.15 * 6.0 + 0.1 * 9.0 + 0.1 * 12.0;
        let i_cur = 0.2 * (5.0 + 15.0 + 20.0 + 25.0) + 0.1 * (30.0 + 33.0);
        let expected = 0.0044 * 2.0 * p_pal + 0.2714 * 3.0 * p_pal + (0.4136 + 0.3106) * p_cur * i_cur;
        assert!((pool.expected_blocks_per_patient() - expected).abs() < 1e-12);
    }

    #[test]
    fn forced_categories_follow_ready_rules() {
        let pool = PatientPool::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..2_000 {
            let p1 = sample_patient(&pool, Some(Category::P1), PatientId(i), 4, 0, &mut rng).unwrap();
            assert_eq!(p1.ready_offset(), 0);
            let p2 = sample_patient(&pool, Some(Category::P2), PatientId(i), 4, 0, &mut rng).unwrap();
            assert!(p2.ready_offset() <= 2);
            let p4 = sample_patient(&pool, Some(Category::P4), PatientId(i), 4, 0, &mut rng).unwrap();
            assert!((5..=7).contains(&p4.ready_offset()));
            assert_eq!(p4.due_day, 4 + 28);
        }
    }

    #[test]
    fn bad_weights_rejected() {
        let mut pool = PatientPool::default();
        pool.category_weights.insert(Category::P1, 0.5);
        assert!(pool.validate().is_err());
        assert!(DiscreteDist::new(vec![1, 2], vec![1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let pool = PatientPool::default();
        let text = serde_json::to_string_pretty(&pool).unwrap();
        assert_eq!(PatientPool::from_json(&text).unwrap(), pool);
    }
}
