// SPDX-License-Identifier: Apache-2.0

//! Signatures of the built-in theory symbols and the theory classification
//! used for logic selection and bug grouping.
//!
//! Supported surface: Core, Ints, Reals, Reals_Ints, Strings,
//! FixedSizeBitVectors, Arrays, plus the common sequence extension.
//! Integer and real operands may be mixed in arithmetic, as mainstream
//! solvers accept.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Index, Sort};

/// `None` stands for a sort we cannot determine (solver-specific term).
pub(crate) type Ty = Option<Sort>;

type Sig = Result<Ty, String>;

fn show(t: &Ty) -> String {
    t.as_ref().map_or_else(|| "?".to_string(), ToString::to_string)
}

fn is_numeric(t: &Ty) -> bool {
    match t {
        Some(s) => s.is_simple("Int") || s.is_simple("Real"),
        None => true,
    }
}

fn expect(arg: &Ty, want: &Sort, op: &str) -> Result<(), String> {
    match arg {
        Some(s) if s != want => Err(format!("`{op}` expects {want}, found {s}")),
        _ => Ok(()),
    }
}

fn expect_all(args: &[Ty], want: &Sort, op: &str) -> Result<(), String> {
    args.iter().try_for_each(|a| expect(a, want, op))
}

fn arity(op: &str, args: &[Ty], min: usize, max: Option<usize>) -> Result<(), String> {
    let n = args.len();
    if n < min || max.is_some_and(|m| n > m) {
        let want = match max {
            Some(m) if m == min => format!("{min}"),
            Some(m) => format!("{min}..{m}"),
            None => format!("at least {min}"),
        };
        return Err(format!("`{op}` expects {want} argument(s), found {n}"));
    }
    Ok(())
}

/// Two sorts are compatible when equal, when either is unknown, or when
/// both are numeric.
pub(crate) fn compatible(a: &Ty, b: &Ty) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y || (is_numeric(a) && is_numeric(b)),
        _ => true,
    }
}

fn same_sort(op: &str, args: &[Ty]) -> Result<Ty, String> {
    let mut known: Ty = None;
    for a in args {
        if let Some(k) = &known {
            if !compatible(&Some(k.clone()), a) {
                return Err(format!(
                    "`{op}` expects arguments of equal sort, found {k} and {}",
                    show(a)
                ));
            }
        } else if a.is_some() {
            known = a.clone();
        }
    }
    Ok(known)
}

fn numeric_result(op: &str, args: &[Ty]) -> Sig {
    let mut result: Ty = None;
    for a in args {
        if !is_numeric(a) {
            return Err(format!("`{op}` expects Int or Real, found {}", show(a)));
        }
        match (a, &result) {
            (Some(s), _) if s.is_simple("Real") => result = Some(Sort::real()),
            (Some(s), None) => result = Some(s.clone()),
            _ => {}
        }
    }
    Ok(result)
}

fn numeric_args(op: &str, args: &[Ty]) -> Result<(), String> {
    numeric_result(op, args).map(|_| ())
}

fn bv(op: &str, a: &Ty) -> Result<Option<u64>, String> {
    match a {
        None => Ok(None),
        Some(s) => s
            .bv_width()
            .map(Some)
            .ok_or_else(|| format!("`{op}` expects a bit-vector, found {s}")),
    }
}

fn bv_same(op: &str, args: &[Ty]) -> Result<Option<u64>, String> {
    let mut width = None;
    for a in args {
        if let Some(w) = bv(op, a)? {
            match width {
                Some(prev) if prev != w => {
                    return Err(format!("`{op}` expects operands of equal width, found {prev} and {w}"))
                }
                _ => width = Some(w),
            }
        }
    }
    Ok(width)
}

fn seq_elem(op: &str, a: &Ty) -> Result<Ty, String> {
    match a {
        None => Ok(None),
        Some(s) if s.name == "Seq" && s.params.len() == 1 && s.indices.is_empty() => Ok(Some(s.params[0].clone())),
        Some(s) => Err(format!("`{op}` expects a sequence, found {s}")),
    }
}

fn index_num(op: &str, indices: &[Index], i: usize) -> Result<u64, String> {
    indices
        .get(i)
        .and_then(Index::as_u64)
        .ok_or_else(|| format!("`{op}` needs a numeral index"))
}

/// Sort of a built-in nullary identifier.
pub(crate) fn builtin_constant(sym: &str, indices: &[Index]) -> Option<Sig> {
    if indices.is_empty() {
        return match sym {
            "true" | "false" => Some(Ok(Some(Sort::bool()))),
            "re.none" | "re.all" | "re.allchar" | "re.nostr" => Some(Ok(Some(Sort::reglan()))),
            _ => None,
        };
    }
    if let Some(digits) = sym.strip_prefix("bv") {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && indices.len() == 1 {
            return Some(index_num(sym, indices, 0).map(|w| Some(Sort::bitvec(w))));
        }
    }
    match sym {
        "char" if indices.len() == 1 => Some(Ok(Some(Sort::string()))),
        _ => None,
    }
}

/// Result sort of a built-in function applied to `args`; `None` when the
/// symbol is not built in.
pub(crate) fn builtin_app(sym: &str, indices: &[Index], args: &[Ty]) -> Option<Sig> {
    let b = Sort::bool;
    let int = Sort::int;
    let string = Sort::string;
    let re = Sort::reglan;
    let bool_ok = |r: Result<(), String>| r.map(|_| Some(Sort::bool()));

    if !indices.is_empty() {
        return builtin_indexed(sym, indices, args);
    }

    let sig: Sig = match sym {
        // Core
        "not" => arity(sym, args, 1, Some(1)).and_then(|_| bool_ok(expect_all(args, &b(), sym))),
        "and" | "or" => arity(sym, args, 1, None).and_then(|_| bool_ok(expect_all(args, &b(), sym))),
        "=>" | "xor" => arity(sym, args, 2, None).and_then(|_| bool_ok(expect_all(args, &b(), sym))),
        "=" | "distinct" => arity(sym, args, 2, None).and_then(|_| same_sort(sym, args).map(|_| Some(b()))),
        "ite" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect(&args[0], &b(), sym))
            .and_then(|_| same_sort(sym, &args[1..])),

        // Ints, Reals, Reals_Ints
        "+" | "*" => arity(sym, args, 1, None).and_then(|_| numeric_result(sym, args)),
        "-" => arity(sym, args, 1, None).and_then(|_| numeric_result(sym, args)),
        "div" | "mod" => arity(sym, args, 2, None)
            .and_then(|_| expect_all(args, &int(), sym))
            .map(|_| Some(int())),
        "abs" => arity(sym, args, 1, Some(1)).and_then(|_| numeric_result(sym, args)),
        "/" => arity(sym, args, 2, None)
            .and_then(|_| numeric_args(sym, args))
            .map(|_| Some(Sort::real())),
        "<" | "<=" | ">" | ">=" => arity(sym, args, 2, None)
            .and_then(|_| numeric_args(sym, args))
            .map(|_| Some(b())),
        "to_real" => arity(sym, args, 1, Some(1))
            .and_then(|_| numeric_args(sym, args))
            .map(|_| Some(Sort::real())),
        "to_int" => arity(sym, args, 1, Some(1))
            .and_then(|_| numeric_args(sym, args))
            .map(|_| Some(int())),
        "is_int" => arity(sym, args, 1, Some(1))
            .and_then(|_| numeric_args(sym, args))
            .map(|_| Some(b())),

        // Strings
        "str.++" => arity(sym, args, 1, None)
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(string())),
        "str.len" | "str.to_code" | "str.to_int" | "str.to.int" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(int())),
        "str.<" | "str.<=" | "str.prefixof" | "str.suffixof" | "str.contains" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(b())),
        "str.is_digit" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(b())),
        "str.at" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect(&args[0], &string(), sym))
            .and_then(|_| expect(&args[1], &int(), sym))
            .map(|_| Some(string())),
        "str.substr" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect(&args[0], &string(), sym))
            .and_then(|_| expect_all(&args[1..], &int(), sym))
            .map(|_| Some(string())),
        "str.indexof" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect_all(&args[..2], &string(), sym))
            .and_then(|_| expect(&args[2], &int(), sym))
            .map(|_| Some(int())),
        "str.replace" | "str.replace_all" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(string())),
        "str.replace_re" | "str.replace_re_all" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect(&args[0], &string(), sym))
            .and_then(|_| expect(&args[1], &re(), sym))
            .and_then(|_| expect(&args[2], &string(), sym))
            .map(|_| Some(string())),
        "str.from_code" | "str.from_int" | "int.to.str" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect_all(args, &int(), sym))
            .map(|_| Some(string())),
        "str.in_re" | "str.in.re" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect(&args[0], &string(), sym))
            .and_then(|_| expect(&args[1], &re(), sym))
            .map(|_| Some(b())),
        "str.to_re" | "str.to.re" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(re())),
        "re.++" | "re.union" | "re.inter" => arity(sym, args, 1, None)
            .and_then(|_| expect_all(args, &re(), sym))
            .map(|_| Some(re())),
        "re.*" | "re.+" | "re.opt" | "re.comp" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect_all(args, &re(), sym))
            .map(|_| Some(re())),
        "re.diff" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect_all(args, &re(), sym))
            .map(|_| Some(re())),
        "re.range" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect_all(args, &string(), sym))
            .map(|_| Some(re())),

        // Arrays
        "select" => arity(sym, args, 2, Some(2)).and_then(|_| match &args[0] {
            None => Ok(None),
            Some(a) if a.name == "Array" && a.params.len() == 2 => {
                expect(&args[1], &a.params[0], sym).map(|_| Some(a.params[1].clone()))
            }
            Some(other) => Err(format!("`select` expects an array, found {other}")),
        }),
        "store" => arity(sym, args, 3, Some(3)).and_then(|_| match &args[0] {
            None => Ok(None),
            Some(a) if a.name == "Array" && a.params.len() == 2 => expect(&args[1], &a.params[0], sym)
                .and_then(|_| expect(&args[2], &a.params[1], sym))
                .map(|_| Some(a.clone())),
            Some(other) => Err(format!("`store` expects an array, found {other}")),
        }),

        // FixedSizeBitVectors
        "concat" => arity(sym, args, 2, None).and_then(|_| {
            let mut total = Some(0u64);
            for a in args {
                match bv(sym, a)? {
                    Some(w) => total = total.map(|t| t + w),
                    None => total = None,
                }
            }
            Ok(total.map(Sort::bitvec))
        }),
        "bvnot" | "bvneg" => arity(sym, args, 1, Some(1))
            .and_then(|_| bv_same(sym, args))
            .map(|w| w.map(Sort::bitvec)),
        "bvand" | "bvor" | "bvxor" | "bvadd" | "bvmul" => arity(sym, args, 2, None)
            .and_then(|_| bv_same(sym, args))
            .map(|w| w.map(Sort::bitvec)),
        "bvudiv" | "bvurem" | "bvshl" | "bvlshr" | "bvsub" | "bvsdiv" | "bvsrem" | "bvsmod" | "bvashr" | "bvnand"
        | "bvnor" | "bvxnor" => arity(sym, args, 2, Some(2))
            .and_then(|_| bv_same(sym, args))
            .map(|w| w.map(Sort::bitvec)),
        "bvcomp" => arity(sym, args, 2, Some(2))
            .and_then(|_| bv_same(sym, args))
            .map(|_| Some(Sort::bitvec(1))),
        "bvult" | "bvule" | "bvugt" | "bvuge" | "bvslt" | "bvsle" | "bvsgt" | "bvsge" => arity(sym, args, 2, Some(2))
            .and_then(|_| bv_same(sym, args))
            .map(|_| Some(b())),
        "bv2nat" | "bv2int" | "ubv_to_int" | "sbv_to_int" => arity(sym, args, 1, Some(1))
            .and_then(|_| bv(sym, &args[0]))
            .map(|_| Some(int())),

        // Sequences
        "seq.unit" => arity(sym, args, 1, Some(1)).map(|_| args[0].clone().map(|e| Sort::parametric("Seq", vec![e]))),
        "seq.len" => arity(sym, args, 1, Some(1))
            .and_then(|_| seq_elem(sym, &args[0]))
            .map(|_| Some(int())),
        "seq.rev" => arity(sym, args, 1, Some(1))
            .and_then(|_| seq_elem(sym, &args[0]))
            .map(|_| args[0].clone()),
        "seq.++" => arity(sym, args, 1, None).and_then(|_| {
            for a in args {
                seq_elem(sym, a)?;
            }
            same_sort(sym, args)
        }),
        "seq.nth" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect(&args[1], &int(), sym))
            .and_then(|_| seq_elem(sym, &args[0])),
        "seq.at" => arity(sym, args, 2, Some(2))
            .and_then(|_| expect(&args[1], &int(), sym))
            .and_then(|_| seq_elem(sym, &args[0]))
            .map(|_| args[0].clone()),
        "seq.extract" => arity(sym, args, 3, Some(3))
            .and_then(|_| expect_all(&args[1..], &int(), sym))
            .and_then(|_| seq_elem(sym, &args[0]))
            .map(|_| args[0].clone()),
        "seq.contains" | "seq.prefixof" | "seq.suffixof" => arity(sym, args, 2, Some(2))
            .and_then(|_| seq_elem(sym, &args[0]))
            .and_then(|_| same_sort(sym, args))
            .map(|_| Some(b())),
        "seq.indexof" => arity(sym, args, 3, Some(3))
            .and_then(|_| seq_elem(sym, &args[0]))
            .and_then(|_| same_sort(sym, &args[..2]))
            .and_then(|_| expect(&args[2], &int(), sym))
            .map(|_| Some(int())),
        "seq.replace" => arity(sym, args, 3, Some(3))
            .and_then(|_| seq_elem(sym, &args[0]))
            .and_then(|_| same_sort(sym, args)),
        "seq.update" => arity(sym, args, 3, Some(3))
            .and_then(|_| seq_elem(sym, &args[0]))
            .and_then(|_| expect(&args[1], &int(), sym))
            .and_then(|_| same_sort(sym, &[args[0].clone(), args[2].clone()])),
        _ => return None,
    };
    Some(sig)
}

fn builtin_indexed(sym: &str, indices: &[Index], args: &[Ty]) -> Option<Sig> {
    let sig = match sym {
        "divisible" => arity(sym, args, 1, Some(1))
            .and_then(|_| index_num(sym, indices, 0))
            .and_then(|_| expect(&args[0], &Sort::int(), sym))
            .map(|_| Some(Sort::bool())),
        "extract" => arity(sym, args, 1, Some(1)).and_then(|_| {
            let hi = index_num(sym, indices, 0)?;
            let lo = index_num(sym, indices, 1)?;
            if hi < lo {
                return Err(format!("`extract` indices reversed: {hi} < {lo}"));
            }
            if let Some(w) = bv(sym, &args[0])? {
                if hi >= w {
                    return Err(format!("`extract` index {hi} out of range for width {w}"));
                }
            }
            Ok(Some(Sort::bitvec(hi - lo + 1)))
        }),
        "zero_extend" | "sign_extend" => arity(sym, args, 1, Some(1)).and_then(|_| {
            let k = index_num(sym, indices, 0)?;
            Ok(bv(sym, &args[0])?.map(|w| Sort::bitvec(w + k)))
        }),
        "repeat" => arity(sym, args, 1, Some(1)).and_then(|_| {
            let k = index_num(sym, indices, 0)?;
            if k == 0 {
                return Err("`repeat` needs a positive index".into());
            }
            Ok(bv(sym, &args[0])?.map(|w| Sort::bitvec(w * k)))
        }),
        "rotate_left" | "rotate_right" => arity(sym, args, 1, Some(1))
            .and_then(|_| index_num(sym, indices, 0))
            .and_then(|_| bv(sym, &args[0]))
            .map(|w| w.map(Sort::bitvec)),
        "int2bv" | "nat2bv" | "int_to_bv" => arity(sym, args, 1, Some(1))
            .and_then(|_| expect(&args[0], &Sort::int(), sym))
            .and_then(|_| index_num(sym, indices, 0))
            .map(|w| Some(Sort::bitvec(w))),
        "re.loop" => arity(sym, args, 1, Some(1))
            .and_then(|_| index_num(sym, indices, 0))
            .and_then(|_| expect(&args[0], &Sort::reglan(), sym))
            .map(|_| Some(Sort::reglan())),
        "re.^" => arity(sym, args, 1, Some(1))
            .and_then(|_| index_num(sym, indices, 0))
            .and_then(|_| expect(&args[0], &Sort::reglan(), sym))
            .map(|_| Some(Sort::reglan())),
        _ => return None,
    };
    Some(sig)
}

/// Whether `sym` is one of the Boolean connectives that skeletonization
/// descends through.
pub fn is_connective(sym: &str) -> bool {
    matches!(sym, "and" | "or" | "not" | "=>" | "xor")
}

/// Theory families used for logic selection and soundness-bug grouping.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theory {
    Core,
    Ints,
    Reals,
    Strings,
    BitVectors,
    Arrays,
    Sequences,
    Datatypes,
    Uninterpreted,
    Quantifiers,
    /// Solver-specific symbol family, named by its dotted prefix.
    Other(String),
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theory::Other(p) => write!(f, "other:{p}"),
            t => write!(f, "{t:?}"),
        }
    }
}

/// Theory implied by a sort.
pub(crate) fn theory_of_sort(s: &Sort, out: &mut BTreeSet<Theory>) {
    match s.name.as_str() {
        "Bool" => {
            out.insert(Theory::Core);
        }
        "Int" => {
            out.insert(Theory::Ints);
        }
        "Real" => {
            out.insert(Theory::Reals);
        }
        "String" | "RegLan" => {
            out.insert(Theory::Strings);
        }
        "BitVec" => {
            out.insert(Theory::BitVectors);
        }
        "Array" => {
            out.insert(Theory::Arrays);
        }
        "Seq" => {
            out.insert(Theory::Sequences);
        }
        other => {
            out.insert(Theory::Other(other.to_string()));
        }
    }
    for p in &s.params {
        theory_of_sort(p, out);
    }
}

/// Theories a logic name admits, or `None` for `ALL` and unknown logics
/// that we cannot interpret.
pub fn logic_theories(logic: &str) -> Option<BTreeSet<Theory>> {
    if logic == "ALL" {
        return None;
    }
    let (quantified, body) = match logic.strip_prefix("QF_") {
        Some(rest) => (false, rest),
        None => (true, logic),
    };
    let mut out = BTreeSet::from([Theory::Core]);
    if quantified {
        out.insert(Theory::Quantifiers);
    }
    let mut rest = body;
    if rest.starts_with("AX") || (rest.starts_with('A') && !rest.starts_with("ALL")) {
        out.insert(Theory::Arrays);
        rest = &rest[1..];
        if let Some(r) = rest.strip_prefix('X') {
            rest = r;
        }
    }
    if let Some(r) = rest.strip_prefix("DT") {
        out.insert(Theory::Datatypes);
        rest = r;
    }
    if let Some(r) = rest.strip_prefix('S') {
        out.insert(Theory::Strings);
        rest = r;
    }
    if let Some(r) = rest.strip_prefix("UF") {
        out.insert(Theory::Uninterpreted);
        rest = r;
    }
    if let Some(r) = rest.strip_prefix("BV") {
        out.insert(Theory::BitVectors);
        rest = r;
    }
    let arith: &[(&str, &[Theory])] = &[
        ("LIRA", &[Theory::Ints, Theory::Reals]),
        ("NIRA", &[Theory::Ints, Theory::Reals]),
        ("LIA", &[Theory::Ints]),
        ("NIA", &[Theory::Ints]),
        ("IDL", &[Theory::Ints]),
        ("LRA", &[Theory::Reals]),
        ("NRA", &[Theory::Reals]),
        ("RDL", &[Theory::Reals]),
        ("", &[]),
    ];
    // Anything left over (FF, FP, ...) is a theory this table does not
    // know, so coverage cannot be judged.
    let (_, ts) = arith.iter().find(|(name, _)| rest == *name)?;
    out.extend(ts.iter().cloned());
    Some(out)
}
