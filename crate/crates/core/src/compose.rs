//! Horizontal composition (tagged union with a biased die) and functional
//! composition (chaining) of lingos.

use std::sync::Arc;

use crate::error::{arg_err, domain_err, Error, Result};
use crate::lingo::{Kind, Lingo};
use crate::param::{ParamDomain, Parameter};
use crate::prf::{self, SecretSeed};
use crate::value::{Domain, Value};

/// Branches `(Λ_i, d0_i)` sharing one input domain, plus a bias vector.
#[derive(Debug, Clone)]
pub struct HorizontalSpec {
    pub branches: Vec<(Lingo, Value)>,
    pub bias: Vec<u64>,
}

impl HorizontalSpec {
    /// Fair die, each default the zero element of its branch's output domain.
    pub fn fair(lingos: Vec<Lingo>) -> HorizontalSpec {
        let bias = vec![1; lingos.len()];
        let branches = lingos
            .into_iter()
            .map(|l| {
                let d0 = l.d2().zero();
                (l, d0)
            })
            .collect();
        HorizontalSpec { branches, bias }
    }
}

#[derive(Debug)]
pub(crate) struct Horizontal {
    branches: Vec<(Lingo, Value)>,
    pub(crate) bias: Vec<u64>,
}

impl Horizontal {
    pub(crate) fn branch(&self, index: u32) -> Option<&Lingo> {
        self.branches.get((index as usize).checked_sub(1)?).map(|(l, _)| l)
    }

    pub(crate) fn f(&self, d1: &Value, a: &Parameter) -> Result<Value> {
        let (lingo, _, ai) = self.select(a)?;
        lingo.f_raw(d1, ai)
    }

    pub(crate) fn g(&self, d2: &Value, a: &Parameter, hits: &mut u32) -> Result<Value> {
        let (lingo, d0, ai) = self.select(a)?;
        if lingo.d2().contains(d2) {
            lingo.g_raw(d2, ai, hits)
        } else {
            *hits += 1;
            lingo.g_raw(d0, ai, hits)
        }
    }

    fn select<'a>(&'a self, a: &'a Parameter) -> Result<(&'a Lingo, &'a Value, &'a Parameter)> {
        let Parameter::Tagged { index, inner } = a else {
            return domain_err(format!("horizontal composition needs a tagged parameter, got {a}"));
        };
        match self.branches.get((*index as usize).wrapping_sub(1)) {
            Some((l, d0)) => Ok((l, d0, inner)),
            None => domain_err(format!("no branch {index}")),
        }
    }
}

/// Builds `⊕_{d0} Λ⃗`. The result decodes with branch `i`'s `g` selected by
/// the parameter tag; values outside that branch's output domain decode
/// the branch default instead.
pub fn horizontal(spec: HorizontalSpec) -> Result<Lingo> {
    let HorizontalSpec { branches, bias } = spec;
    if branches.len() < 2 {
        return arg_err("horizontal composition needs at least two lingos");
    }
    if bias.len() != branches.len() {
        return arg_err(format!("bias has {} faces for {} lingos", bias.len(), branches.len()));
    }
    if bias.contains(&0) {
        return arg_err("bias weights must be positive");
    }
    let d1 = branches[0].0.d1().clone();
    for (l, d0) in &branches {
        if !l.d1().same_as(&d1) {
            return Err(Error::Composition(format!(
                "{} has input domain {} but {} has {}",
                l.id(),
                l.d1(),
                branches[0].0.id(),
                d1
            )));
        }
        if !l.d2().contains(d0) {
            return Err(Error::Composition(format!("default {d0} is not in {} of {}", l.d2(), l.id())));
        }
    }

    let id = format!(
        "hor({};bias={};d0={})",
        join(branches.iter().map(|(l, _)| l.id().to_string())),
        join(bias.iter().map(u64::to_string)),
        join(branches.iter().map(|(_, d0)| d0.to_string())),
    );
    let d2 = Domain::union(branches.iter().map(|(l, _)| l.d2().clone()).collect());
    let params = ParamDomain::Tagged(branches.iter().map(|(l, _)| l.param_domain().clone()).collect());
    let f_checkable = branches.iter().all(|(l, _)| l.is_f_checkable());
    Ok(Lingo {
        id,
        d1,
        d2,
        params,
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable,
        kind: Kind::Horizontal(Arc::new(Horizontal { branches, bias })),
    })
}

/// Builds `Λ ⊙ Λ'`: encode with `first`, then `second`.
pub fn functional(first: Lingo, second: Lingo) -> Result<Lingo> {
    if !first.d2().same_as(second.d1()) {
        return Err(Error::Composition(format!(
            "{} outputs {} but {} expects {}",
            first.id(),
            first.d2(),
            second.id(),
            second.d1()
        )));
    }
    Ok(Lingo {
        id: format!("fun({},{})", first.id(), second.id()),
        d1: first.d1().clone(),
        d2: second.d2().clone(),
        params: ParamDomain::Product(Box::new(first.param_domain().clone()), Box::new(second.param_domain().clone())),
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: second.is_f_checkable(),
        kind: Kind::Functional(Arc::new(first), Arc::new(second)),
    })
}

/// One throw of a die with face weights `bias`: face `j` (1-based) comes up
/// for `draw mod Σβ` in `[β1+…+β(j−1), β1+…+βj)`.
pub fn throw_biased(draw: u64, bias: &[u64]) -> Result<u32> {
    if bias.len() < 2 {
        return arg_err("a die needs at least two faces");
    }
    if bias.contains(&0) {
        return arg_err("bias weights must be positive");
    }
    let total: u128 = bias.iter().map(|&b| u128::from(b)).sum();
    let r = u128::from(draw) % total;
    let mut acc = 0u128;
    for (j, &b) in bias.iter().enumerate() {
        acc += u128::from(b);
        if r < acc {
            return Ok(j as u32 + 1);
        }
    }
    unreachable!("r < total")
}

/// `⊕param(n) = (param_{throw(n)}(n), throw(n))` for a horizontal composition.
pub fn horizontal_param(lingo: &Lingo, seed: &SecretSeed, n: u64) -> Result<Parameter> {
    horizontal_param_link(lingo, seed, n, None)
}

pub(crate) fn horizontal_param_link(
    lingo: &Lingo,
    seed: &SecretSeed,
    n: u64,
    link: Option<(&str, &str)>,
) -> Result<Parameter> {
    let Kind::Horizontal(h) = &lingo.kind else {
        return arg_err(format!("{} is not a horizontal composition", lingo.id()));
    };
    // The die reads its own sub-stream so the face is independent of the branch parameter.
    let face = throw_biased(prf::prf(&seed.derive("die"), n), &h.bias)?;
    let branch = h.branch(face).expect("face addresses a branch");
    Ok(Parameter::tagged(face, prf::param_for_link(branch, seed, n, link)))
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lingo::{dnc_lingo, reverse_dnc_lingo, xor_bseq_lingo, xor_lingo};

    fn s(v: u32) -> Parameter {
        Parameter::scalar(v)
    }

    fn xorbs_dnc() -> Lingo {
        horizontal(HorizontalSpec {
            branches: vec![(xor_bseq_lingo(), Value::nat(0u32)), (dnc_lingo(), Value::nat_pair(0, 0))],
            bias: vec![1, 5],
        })
        .unwrap()
    }

    #[test]
    fn horizontal_branch_two_matches_dnc() {
        let h = xorbs_dnc();
        let out = h.apply_f(&Value::nat(13u32), &Parameter::tagged(2, s(3))).unwrap();
        assert_eq!(out, Value::nat_pair(3, 3));
        assert_eq!(h.apply_g(&out, &Parameter::tagged(2, s(3))).unwrap(), Value::nat(13u32));
        assert_eq!(h.id(), "hor(xorbseq,dnc;bias=1,5;d0=0,[0,0])");
        assert!(!h.is_f_checkable());
    }

    #[test]
    fn horizontal_else_branch_uses_default() {
        let h = horizontal(HorizontalSpec {
            branches: vec![(xor_bseq_lingo(), Value::nat(9u32)), (dnc_lingo(), Value::nat_pair(0, 0))],
            bias: vec![1, 1],
        })
        .unwrap();
        let (v, hits) = h.apply_g_counting(&Value::nat_pair(3, 3), &Parameter::tagged(1, s(5))).unwrap();
        assert_eq!(v, Value::nat(9u32 ^ 5));
        assert_eq!(hits, 1);
    }

    #[test]
    fn horizontal_rejects_mismatched_inputs() {
        let err = horizontal(HorizontalSpec::fair(vec![xor_lingo(8).unwrap(), dnc_lingo()])).unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
        let err = horizontal(HorizontalSpec {
            branches: vec![(dnc_lingo(), Value::nat(0u32)), (reverse_dnc_lingo(), Value::nat_pair(0, 0))],
            bias: vec![1, 1],
        })
        .unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
        assert!(horizontal(HorizontalSpec::fair(vec![dnc_lingo()])).is_err());
    }

    #[test]
    fn horizontal_checkability_is_conjunction() {
        let both = horizontal(HorizontalSpec::fair(vec![dnc_lingo(), reverse_dnc_lingo()])).unwrap();
        assert!(both.is_f_checkable());
    }

    #[test]
    fn functional_example() {
        let l = functional(xor_bseq_lingo(), dnc_lingo()).unwrap();
        let a = Parameter::pair(s(5), s(3));
        let out = l.apply_f(&Value::nat(13u32), &a).unwrap();
        assert_eq!(out, Value::nat_pair(2, 3));
        assert_eq!(l.apply_g(&out, &a).unwrap(), Value::nat(13u32));
        assert!(l.is_f_checkable());
        assert_eq!(l.id(), "fun(xorbseq,dnc)");
    }

    #[test]
    fn functional_requires_chaining_domains() {
        assert!(matches!(functional(dnc_lingo(), xor_bseq_lingo()), Err(Error::Composition(_))));
    }

    #[test]
    fn die_boundaries() {
        assert_eq!(throw_biased(0, &[1, 1]).unwrap(), 1);
        assert_eq!(throw_biased(1, &[1, 1]).unwrap(), 2);
        assert_eq!(throw_biased(2, &[1, 1]).unwrap(), 1);
        assert_eq!(throw_biased(0, &[1, 5]).unwrap(), 1);
        for d in 1..6 {
            assert_eq!(throw_biased(d, &[1, 5]).unwrap(), 2);
        }
        assert_eq!(throw_biased(u64::MAX, &[u64::MAX, 1]).unwrap(), 2);
        assert!(throw_biased(0, &[1]).is_err());
        assert!(throw_biased(0, &[1, 0]).is_err());
    }

    #[test]
    fn horizontal_param_tag_follows_die() {
        let h = xorbs_dnc();
        let seed = SecretSeed::from_u64(11);
        for n in 0..50 {
            let Parameter::Tagged { index, .. } = horizontal_param(&h, &seed, n).unwrap() else {
                panic!("untagged");
            };
            assert_eq!(index, throw_biased(prf::prf(&seed.derive("die"), n), &[1, 5]).unwrap());
        }
        assert!(horizontal_param(&dnc_lingo(), &seed, 0).is_err());
    }
}
