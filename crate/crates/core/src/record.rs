//! Versioned plain-text record of a profile set.
//!
//! ```text
//! gkrs-profile 1
//! family cao
//! n 2
//! ell 2
//! a 1.0000000000000000e0
//! scale 1.0000000000000000e0
//! alpha 0.0000000000000000e0 1.0000000000000000e0
//! dims 0 0
//! epsilon 1 -1
//! p_c 1.0000000000000000e0
//! q ...
//! profile <rate> <c> ; <P coefficients, constant first>
//! flags <flat> <ricci_flat> <incomplete_expected>
//! ```
//!
//! Floats carry 17 significant digits, so a record round-trips bit for bit.
//! Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::profiles::{Family, ProfileSet};
use crate::symfun::{ExpPoly, Poly};

pub const RECORD_VERSION: u32 = 1;
const MAX_ELL: usize = 32;
const MAX_COEFFS: usize = 256;

/// A profile set together with the scale it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub set: ProfileSet,
    pub scale: f64,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(" ")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

impl ProfileRecord {
    pub fn to_text(&self) -> String {
        let ps = &self.set;
        let mut out = format!("gkrs-profile {RECORD_VERSION}\n");
        let fam = match ps.family {
            Family::Cao => "cao",
            Family::TaubNut => "taub_nut",
        };
        out += &format!("family {fam}\nn {}\nell {}\n", ps.n(), ps.ell());
        out += &format!("a {}\nscale {}\n", fmt(ps.a), fmt(self.scale));
        out += &format!("alpha {}\n", fmt_list(&ps.alpha));
        let dims: Vec<String> = ps.dims.iter().map(|d| d.to_string()).collect();
        out += &format!("dims {}\n", dims.join(" "));
        let eps: Vec<String> = ps.epsilon.iter().map(|e| e.to_string()).collect();
        out += &format!("epsilon {}\n", eps.join(" "));
        out += &format!("p_c {}\nq {}\n", fmt_list(&ps.p_c.coeffs), fmt_list(&ps.q.coeffs));
        for f in &ps.profiles {
            out += &format!("profile {} {} ; {}\n", fmt(f.rate), fmt(f.c), fmt_list(&f.poly.coeffs));
        }
        out += &format!(
            "flags {} {} {}\n",
            flag(ps.flat),
            flag(ps.ricci_flat),
            flag(ps.incomplete_expected)
        );
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (no, l) = lines.next().ok_or_else(|| err(0, &format!("missing `{key}` line")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(err(no, &format!("expected `{key}`")));
            }
            Ok((no, it.collect()))
        };
        let floats = |no: usize, toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(err(no, &format!("bad number `{t}`"))),
                })
                .collect()
        };
        let single = |no: usize, toks: &[&str]| -> Result<f64> {
            match floats(no, toks)?.as_slice() {
                [v] => Ok(*v),
                _ => Err(err(no, "expected one number")),
            }
        };
        let count = |no: usize, toks: &[&str]| -> Result<usize> {
            match toks {
                [t] => t.parse().map_err(|_| err(no, "expected a count")),
                _ => Err(err(no, "expected a count")),
            }
        };

        let (no, v) = next("gkrs-profile")?;
        if v != [RECORD_VERSION.to_string().as_str()] {
            return Err(err(no, "unsupported record version"));
        }
        let (no, v) = next("family")?;
        let family = match v.as_slice() {
            ["cao"] => Family::Cao,
            ["taub_nut"] => Family::TaubNut,
            _ => return Err(err(no, "unknown family")),
        };
        let (n_no, v) = next("n")?;
        let n = count(n_no, &v)?;
        let (no, v) = next("ell")?;
        let ell = count(no, &v)?;
        if ell == 0 || ell > MAX_ELL {
            return Err(err(no, "ell out of range"));
        }
        let (no, v) = next("a")?;
        let a = single(no, &v)?;
        let (no, v) = next("scale")?;
        let scale = single(no, &v)?;
        if scale <= 0.0 {
            return Err(err(no, "scale must be positive"));
        }
        let (no, v) = next("alpha")?;
        let alpha = floats(no, &v)?;
        if alpha.len() != ell || alpha.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(err(no, "alpha must hold ell increasing nodes"));
        }
        let (no, v) = next("dims")?;
        let dims: Vec<usize> = v
            .iter()
            .map(|t| t.parse::<usize>().ok().filter(|d| *d <= MAX_COEFFS))
            .collect::<Option<_>>()
            .ok_or_else(|| err(no, "bad dimension"))?;
        if dims.len() != ell {
            return Err(err(no, "dims must hold ell entries"));
        }
        if ell + dims.iter().sum::<usize>() != n {
            return Err(err(n_no, "n does not match ell and dims"));
        }
        let (no, v) = next("epsilon")?;
        let epsilon: Vec<i8> = v
            .iter()
            .map(|t| match *t {
                "1" => Some(1),
                "-1" => Some(-1),
                _ => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| err(no, "epsilon entries must be ±1"))?;
        if epsilon.len() != ell {
            return Err(err(no, "epsilon must hold ell entries"));
        }
        let poly = |no: usize, v: &[&str]| -> Result<Poly> {
            let c = floats(no, v)?;
            if c.is_empty() || c.len() > MAX_COEFFS {
                return Err(err(no, "polynomial needs 1 to 256 coefficients"));
            }
            Ok(Poly::new(c))
        };
        let (no, v) = next("p_c")?;
        let p_c = poly(no, &v)?;
        let (no, v) = next("q")?;
        let q = poly(no, &v)?;
        let mut profiles = Vec::with_capacity(ell);
        for _ in 0..ell {
            let (no, v) = next("profile")?;
            let semi = v.iter().position(|t| *t == ";").ok_or_else(|| err(no, "missing `;`"))?;
            let head = floats(no, &v[..semi])?;
            let [rate, c] = head.as_slice() else {
                return Err(err(no, "expected rate and c before `;`"));
            };
            profiles.push(ExpPoly {
                poly: poly(no, &v[semi + 1..])?,
                c: *c,
                rate: *rate,
            });
        }
        let (no, v) = next("flags")?;
        let flags: Vec<bool> = v
            .iter()
            .map(|t| match *t {
                "0" => Some(false),
                "1" => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| err(no, "flags must be 0 or 1"))?;
        let [flat, ricci_flat, incomplete_expected] = flags.as_slice() else {
            return Err(err(no, "expected three flags"));
        };
        if let Some((no, _)) = lines.next() {
            return Err(err(no, "trailing content"));
        }
        Ok(Self {
            set: ProfileSet {
                family,
                a,
                alpha,
                dims,
                p_c,
                q,
                profiles,
                epsilon,
                flat: *flat,
                ricci_flat: *ricci_flat,
                incomplete_expected: *incomplete_expected,
            },
            scale,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_cao_profile, build_taubnut_profile, Gauge, SolitonParams};
    use proptest::prelude::*;

    fn params(a: f64, alpha: &[f64], dims: &[usize]) -> SolitonParams {
        SolitonParams {
            a,
            alpha: alpha.to_vec(),
            dims: dims.to_vec(),
            scale: 1.0,
            gauge: Gauge::UnitC,
        }
    }

    #[test]
    fn cao_record_contents() {
        let ps = build_cao_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap();
        let rec = ProfileRecord { set: ps, scale: 1.0 };
        let text = rec.to_text();
        assert!(text.starts_with("gkrs-profile 1\nfamily cao\nn 2\nell 2\n"));
        let line = text.lines().find(|l| l.starts_with("profile")).unwrap();
        let coeffs: Vec<f64> = line
            .split(';')
            .nth(1)
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(coeffs, vec![-1.0, 1.0 - (-2.0_f64).exp()]);
        assert_eq!(ProfileRecord::from_text(&text).unwrap(), rec);
    }

    #[test]
    fn round_trip_all_families() {
        for ps in [
            build_cao_profile(&params(0.7, &[0.0, 1.0], &[1, 0])).unwrap(),
            build_cao_profile(&params(0.0, &[0.0], &[2])).unwrap(),
            build_taubnut_profile(&params(1.3, &[0.0, 1.0, 2.5], &[0, 0, 0])).unwrap(),
        ] {
            let rec = ProfileRecord { set: ps, scale: 1.0 };
            let text = rec.to_text();
            let back = ProfileRecord::from_text(&text).unwrap();
            assert_eq!(back, rec);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn rejects_malformed_records() {
        let ps = build_cao_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap();
        let text = ProfileRecord { set: ps, scale: 1.0 }.to_text();
        let bad = [
            text.replace("gkrs-profile 1", "gkrs-profile 9"),
            text.replace("family cao", "family sphere"),
            text.replace("n 2", "n 3"),
            text.replace("dims 0 0", "dims 0"),
            text.replace("epsilon 1 -1", "epsilon 1 2"),
            text.replace(" ; ", " "),
            text.replace("flags 1", "flags 2").replace("flags 0", "flags 2"),
            format!("{text}extra 1\n"),
            text.lines().take(5).collect::<Vec<_>>().join("\n"),
            text.replace("a 1.0000000000000000e0", "a nan"),
        ];
        for b in bad {
            assert!(matches!(ProfileRecord::from_text(&b), Err(Error::Parse { .. })), "{b}");
        }
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_exactly(a in 0.01f64..5.0, scale in 0.1f64..10.0, gap in 0.01f64..3.0) {
            let p = SolitonParams { a, alpha: vec![0.0, gap], dims: vec![1, 0], scale, gauge: Gauge::UnitC };
            let rec = ProfileRecord { set: build_cao_profile(&p).unwrap(), scale };
            let back = ProfileRecord::from_text(&rec.to_text()).unwrap();
            prop_assert_eq!(back, rec);
        }

        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,400}") {
            let _ = ProfileRecord::from_text(&s);
        }
    }
}
