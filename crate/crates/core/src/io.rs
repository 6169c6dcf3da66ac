//! CSV serialization of sampled functions, weights, polynomials and
//! spectra. Floats are written with 17 significant digits so that every
//! value parses back to the identical `f64`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, WeightSamples};
use crate::trigpoly::TrigPoly;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad float {s:?}: {e}")))
}

fn rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let got: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(Error::Parse(format!(
            "expected columns {header:?}, found {got:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let vals = rec.iter().map(parse_f64).collect::<Result<Vec<_>>>()?;
        out.push(vals);
    }
    Ok(out)
}

fn check_abscissae(grid: &Grid, xs: impl Iterator<Item = f64>) -> Result<()> {
    let mut n = 0;
    for (j, x) in xs.enumerate() {
        if j >= grid.n_points() {
            return Err(Error::Parse("more rows than grid points".into()));
        }
        let expect = grid.x(j);
        if (x - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
            return Err(Error::Parse(format!(
                "row {j}: abscissa {x} does not match grid point {expect}"
            )));
        }
        n += 1;
    }
    if n != grid.n_points() {
        return Err(Error::Parse(format!(
            "expected {} rows, found {n}",
            grid.n_points()
        )));
    }
    Ok(())
}

pub fn write_sampled<W: Write>(f: &SampledFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "re", "im"])?;
    for (x, z) in f.grid().points().zip(f.values()) {
        w.write_record([fmt_f64(x), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sampled<R: Read>(grid: &Grid, input: R) -> Result<SampledFunction> {
    let rows = rows(input, &["x", "re", "im"])?;
    check_abscissae(grid, rows.iter().map(|r| r[0]))?;
    SampledFunction::new(
        *grid,
        rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
    )
}

pub fn write_weight<W: Write>(w: &WeightSamples, out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["x", "w"])?;
    for (x, v) in w.grid().points().zip(w.values()) {
        wr.write_record([fmt_f64(x), fmt_f64(*v)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_weight<R: Read>(grid: &Grid, input: R) -> Result<WeightSamples> {
    let rows = rows(input, &["x", "w"])?;
    check_abscissae(grid, rows.iter().map(|r| r[0]))?;
    WeightSamples::new(*grid, rows.iter().map(|r| r[1]).collect())
}

pub fn write_trigpoly<W: Write>(p: &TrigPoly, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["freq", "re", "im"])?;
    for (f, c) in p.terms() {
        w.write_record([fmt_f64(f), fmt_f64(c.re), fmt_f64(c.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trigpoly<R: Read>(input: R) -> Result<TrigPoly> {
    let rows = rows(input, &["freq", "re", "im"])?;
    TrigPoly::new(
        rows.iter().map(|r| r[0]).collect(),
        rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
    )
}

/// Spectrum file: index, λ, and the sparsity budget ε attached to it.
pub fn write_lambdas<W: Write>(lambdas: &[f64], epsilons: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lambda", "epsilon"])?;
    for (n, (l, e)) in lambdas.iter().zip(epsilons).enumerate() {
        w.write_record([(n + 1).to_string(), fmt_f64(*l), fmt_f64(*e)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_lambdas<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = rows(input, &["n", "lambda", "epsilon"])?;
    Ok((
        rows.iter().map(|r| r[1]).collect(),
        rows.iter().map(|r| r[2]).collect(),
    ))
}

/// Serde adapter writing `±∞` and NaN as the strings `"inf"`, `"-inf"`
/// and `"nan"`, since JSON numbers cannot hold them.
pub mod nonfinite {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct F;

    impl Visitor<'_> for F {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(F)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_base_weight, make_grid};
    use proptest::prelude::*;

    #[test]
    fn weight_round_trip_is_exact() {
        let g = make_grid(7.0, 9).unwrap();
        let (v, h) = make_base_weight(&g, 0.8).unwrap();
        let mut buf = Vec::new();
        write_weight(&v, &mut buf).unwrap();
        assert_eq!(read_weight(&g, buf.as_slice()).unwrap(), v);
        let mut buf = Vec::new();
        write_sampled(&h, &mut buf).unwrap();
        assert_eq!(read_sampled(&g.dual(), buf.as_slice()).unwrap(), h);
    }

    #[test]
    fn wrong_grid_is_rejected() {
        let g = make_grid(2.0, 4).unwrap();
        let f = SampledFunction::zeros(g);
        let mut buf = Vec::new();
        write_sampled(&f, &mut buf).unwrap();
        let other = make_grid(2.0, 5).unwrap();
        assert!(read_sampled(&other, buf.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn trigpoly_round_trip(gaps in prop::collection::vec(1e-6f64..1e3, 0..20),
                               seed in any::<u64>()) {
            let mut f = -1.0;
            let freqs: Vec<f64> = gaps.iter().map(|g| { f += g; f }).collect();
            let coeffs: Vec<Complex64> = (0..freqs.len())
                .map(|i| {
                    let t = (seed.wrapping_mul(i as u64 + 1) % 10_007) as f64;
                    Complex64::new(t.sin() / 3.0, (t * 1.7).cos() * 1e-7)
                })
                .collect();
            let p = TrigPoly::new(freqs, coeffs).unwrap();
            let mut buf = Vec::new();
            write_trigpoly(&p, &mut buf).unwrap();
            prop_assert_eq!(read_trigpoly(buf.as_slice()).unwrap(), p);
        }
    }
}
