use std::sync::Arc;

use crate::error::{arg_err, Result};
use crate::lingo::{Kind, Lingo};
use crate::param::ParamDomain;
use crate::value::Domain;

/// The ♯-transform: encode under two distinct parameters and ship both.
///
/// `f♯(d1, (a, a')) = (f(d1, a), f(d1, a'))`, `g♯((x, x'), (a, a')) = g(x, a)`.
/// A pair whose halves decode to different inputs is never compliant, so the
/// result is f-checkable whenever the input domain has two elements.
pub fn sharp(base: Lingo) -> Result<Lingo> {
    if !base.d1().has_two_elements() {
        return arg_err(format!("{} has fewer than two inputs", base.id()));
    }
    Ok(Lingo {
        id: format!("sharp({})", base.id()),
        d1: base.d1().clone(),
        d2: Domain::product(base.d2().clone(), base.d2().clone()),
        params: ParamDomain::Distinct(Box::new(base.param_domain().clone())),
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: true,
        kind: Kind::Sharp(Arc::new(base)),
    })
}
