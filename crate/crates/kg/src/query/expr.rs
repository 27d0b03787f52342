//! Expression semantics. Any failure is an `EvalError`; callers decide whether
//! that means "false" (FILTER), "unbound" (BIND, projection) or "skip".

use std::cmp::Ordering;

use crate::term::{Date, DateTime, Literal, Term};

use super::ast::{Aggregate, AggFunc, BinOp, Expr, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct EvalError;

pub(crate) type EvalResult = Result<Term, EvalError>;

#[derive(Clone, Copy)]
enum Num {
    I(i64),
    D(f64),
}

impl Num {
    fn of(t: &Term) -> Option<Num> {
        match t {
            Term::Literal(Literal::Integer(i)) => Some(Num::I(*i)),
            Term::Literal(Literal::Double(d)) => Some(Num::D(*d)),
            _ => None,
        }
    }

    fn f(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::D(d) => d,
        }
    }
}

fn finite(v: f64) -> EvalResult {
    if v.is_finite() {
        Ok(Term::double(v))
    } else {
        Err(EvalError)
    }
}

fn date_of(t: &Term) -> Option<Date> {
    match t {
        Term::Literal(Literal::Date(d)) => Some(*d),
        _ => None,
    }
}

fn datetime_of(t: &Term) -> Option<DateTime> {
    match t {
        Term::Literal(Literal::DateTime(d)) => Some(*d),
        _ => None,
    }
}

fn arith(op: BinOp, a: &Term, b: &Term) -> EvalResult {
    if let (Some(x), Some(y)) = (Num::of(a), Num::of(b)) {
        return match (op, x, y) {
            (BinOp::Div, _, _) => {
                if y.f() == 0.0 {
                    Err(EvalError)
                } else {
                    finite(x.f() / y.f())
                }
            }
            (_, Num::I(i), Num::I(j)) => {
                let r = match op {
                    BinOp::Add => i.checked_add(j),
                    BinOp::Sub => i.checked_sub(j),
                    BinOp::Mul => i.checked_mul(j),
                    _ => unreachable!("arith op"),
                };
                r.map(Term::integer).ok_or(EvalError)
            }
            _ => finite(match op {
                BinOp::Add => x.f() + y.f(),
                BinOp::Sub => x.f() - y.f(),
                BinOp::Mul => x.f() * y.f(),
                _ => unreachable!("arith op"),
            }),
        };
    }
    let int = |t: &Term| match t {
        Term::Literal(Literal::Integer(i)) => Some(*i),
        _ => None,
    };
    match op {
        BinOp::Add => {
            let (d, n) = match (date_of(a), int(b), int(a), date_of(b)) {
                (Some(d), Some(n), _, _) | (_, _, Some(n), Some(d)) => (d, n),
                _ => {
                    return match (datetime_of(a), int(b), int(a), datetime_of(b)) {
                        (Some(d), Some(n), _, _) | (_, _, Some(n), Some(d)) => d
                            .secs()
                            .checked_add(n)
                            .and_then(DateTime::from_secs)
                            .map(|d| Term::Literal(Literal::DateTime(d)))
                            .ok_or(EvalError),
                        _ => Err(EvalError),
                    }
                }
            };
            d.add_days(n).map(Term::date).ok_or(EvalError)
        }
        BinOp::Sub => {
            if let (Some(x), Some(y)) = (date_of(a), date_of(b)) {
                return Ok(Term::integer(x.days() - y.days()));
            }
            if let (Some(x), Some(n)) = (date_of(a), int(b)) {
                return n
                    .checked_neg()
                    .and_then(|n| x.add_days(n))
                    .map(Term::date)
                    .ok_or(EvalError);
            }
            if let (Some(x), Some(y)) = (datetime_of(a), datetime_of(b)) {
                return x.secs().checked_sub(y.secs()).map(Term::integer).ok_or(EvalError);
            }
            if let (Some(x), Some(n)) = (datetime_of(a), int(b)) {
                return x
                    .secs()
                    .checked_sub(n)
                    .and_then(DateTime::from_secs)
                    .map(|d| Term::Literal(Literal::DateTime(d)))
                    .ok_or(EvalError);
            }
            Err(EvalError)
        }
        _ => Err(EvalError),
    }
}

/// Ordering between comparable values; `None` inside `Ok` means "not orderable
/// but equality-comparable" (IRIs, quoted triples).
fn compare(a: &Term, b: &Term) -> Result<Option<Ordering>, EvalError> {
    if let (Some(x), Some(y)) = (Num::of(a), Num::of(b)) {
        return Ok(Some(match (x, y) {
            (Num::I(i), Num::I(j)) => i.cmp(&j),
            _ => x.f().partial_cmp(&y.f()).ok_or(EvalError)?,
        }));
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => match (x, y) {
            (Literal::String(s), Literal::String(t)) => Ok(Some(s.cmp(t))),
            (Literal::Date(s), Literal::Date(t)) => Ok(Some(s.cmp(t))),
            (Literal::DateTime(s), Literal::DateTime(t)) => Ok(Some(s.cmp(t))),
            (Literal::Boolean(s), Literal::Boolean(t)) => Ok(Some(s.cmp(t))),
            _ => Err(EvalError),
        },
        _ => Ok(None),
    }
}

fn comparison(op: BinOp, a: &Term, b: &Term) -> EvalResult {
    let ord = compare(a, b)?;
    let r = match (op, ord) {
        (BinOp::Eq, Some(o)) => o == Ordering::Equal,
        (BinOp::Ne, Some(o)) => o != Ordering::Equal,
        (BinOp::Eq, None) => a == b,
        (BinOp::Ne, None) => a != b,
        (_, None) => return Err(EvalError),
        (BinOp::Lt, Some(o)) => o == Ordering::Less,
        (BinOp::Le, Some(o)) => o != Ordering::Greater,
        (BinOp::Gt, Some(o)) => o == Ordering::Greater,
        (BinOp::Ge, Some(o)) => o != Ordering::Less,
        _ => unreachable!("comparison op"),
    };
    Ok(Term::boolean(r))
}

/// Effective boolean value.
pub(crate) fn ebv(t: &Term) -> Result<bool, EvalError> {
    match t {
        Term::Literal(Literal::Boolean(b)) => Ok(*b),
        Term::Literal(Literal::Integer(i)) => Ok(*i != 0),
        Term::Literal(Literal::Double(d)) => Ok(*d != 0.0),
        Term::Literal(Literal::String(s)) => Ok(!s.is_empty()),
        _ => Err(EvalError),
    }
}

pub(crate) trait Env {
    fn var(&self, v: &Var) -> Option<Term>;
    fn aggregate(&self, a: &Aggregate) -> EvalResult;
}

pub(crate) fn eval(e: &Expr, env: &dyn Env) -> EvalResult {
    match e {
        Expr::Var(v) => env.var(v).ok_or(EvalError),
        Expr::Const(t) => Ok(t.clone()),
        Expr::Aggregate(a) => env.aggregate(a),
        Expr::Not(a) => Ok(Term::boolean(!ebv(&eval(a, env)?)?)),
        Expr::Neg(a) => match eval(a, env)? {
            Term::Literal(Literal::Integer(i)) => i.checked_neg().map(Term::integer).ok_or(EvalError),
            Term::Literal(Literal::Double(d)) => Ok(Term::double(-d)),
            _ => Err(EvalError),
        },
        Expr::If(c, a, b) => {
            if ebv(&eval(c, env)?)? {
                eval(a, env)
            } else {
                eval(b, env)
            }
        }
        Expr::Binary(BinOp::And, a, b) => {
            let x = eval(a, env).and_then(|t| ebv(&t));
            let y = eval(b, env).and_then(|t| ebv(&t));
            match (x, y) {
                (Ok(false), _) | (_, Ok(false)) => Ok(Term::boolean(false)),
                (Ok(true), Ok(true)) => Ok(Term::boolean(true)),
                _ => Err(EvalError),
            }
        }
        Expr::Binary(BinOp::Or, a, b) => {
            let x = eval(a, env).and_then(|t| ebv(&t));
            let y = eval(b, env).and_then(|t| ebv(&t));
            match (x, y) {
                (Ok(true), _) | (_, Ok(true)) => Ok(Term::boolean(true)),
                (Ok(false), Ok(false)) => Ok(Term::boolean(false)),
                _ => Err(EvalError),
            }
        }
        Expr::Binary(op, a, b) => {
            let x = eval(a, env)?;
            let y = eval(b, env)?;
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => arith(*op, &x, &y),
                _ => comparison(*op, &x, &y),
            }
        }
    }
}

/// Folds already-evaluated argument values. `values` holds one entry per row
/// in canonical row order; `None` for COUNT(*).
pub(crate) fn fold_aggregate(func: AggFunc, values: Vec<Result<Term, EvalError>>) -> EvalResult {
    match func {
        AggFunc::Count => Ok(Term::integer(values.iter().filter(|v| v.is_ok()).count() as i64)),
        AggFunc::Sum | AggFunc::Avg => {
            let n = values.len();
            let mut acc = Term::integer(0);
            for v in values {
                let v = v?;
                Num::of(&v).ok_or(EvalError)?;
                acc = arith(BinOp::Add, &acc, &v)?;
            }
            if func == AggFunc::Avg && n > 0 {
                arith(BinOp::Div, &acc, &Term::integer(n as i64))
            } else {
                Ok(acc)
            }
        }
        AggFunc::Min | AggFunc::Max => {
            let mut best: Option<Term> = None;
            for v in values {
                let v = v?;
                best = Some(match best {
                    None => {
                        compare(&v, &v)?.ok_or(EvalError)?;
                        v
                    }
                    Some(b) => {
                        let o = compare(&v, &b)?.ok_or(EvalError)?;
                        let better = if func == AggFunc::Min {
                            o == Ordering::Less
                        } else {
                            o == Ordering::Greater
                        };
                        if better {
                            v
                        } else {
                            b
                        }
                    }
                });
            }
            best.ok_or(EvalError)
        }
    }
}
