//! Multipath Rician channels for the direct, AP-RIS and RIS-UE links, and the
//! zero-padded cascaded channels `r_m = u_m * v_m` they induce.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{LinkStatistics, LinkStatisticsSet, SystemConfig};
use crate::error::{Error, Result};

/// Draws a zero-mean circularly symmetric complex Gaussian with `E|z|² = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn unit_phasor<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(1.0, theta)
}

/// Channel impulse response with one tap per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TapVector(Vec<Complex64>);

impl TapVector {
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if taps.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(Error::InvalidConfig("non-finite channel tap".into()));
        }
        Ok(Self(taps))
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// One Rician tap vector: the LoS power `κρ²` on tap 1 with a uniform random
/// phase, the remaining `(1-κ)ρ²` spread evenly over taps `2..=L`.
pub fn sample_tap_vector<R: Rng + ?Sized>(
    taps: usize,
    avg_power: f64,
    los_fraction: f64,
    rng: &mut R,
) -> Result<TapVector> {
    if taps == 0 {
        return Err(Error::InvalidConfig("tap count must be at least 1".into()));
    }
    if !(avg_power > 0.0 && avg_power.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "link power must be positive, got {avg_power}"
        )));
    }
    if !(0.0..=1.0).contains(&los_fraction) {
        return Err(Error::LosFractionOutOfRange {
            link: "sampled",
            kappa: los_fraction,
        });
    }
    if taps == 1 && los_fraction < 1.0 {
        return Err(Error::NlosWithoutTaps {
            kappa: los_fraction,
        });
    }
    let mut out = Vec::with_capacity(taps);
    out.push(unit_phasor(rng) * (los_fraction * avg_power).sqrt());
    if taps > 1 {
        let var = (1.0 - los_fraction) * avg_power / (taps - 1) as f64;
        for _ in 1..taps {
            out.push(complex_gaussian(rng, var));
        }
    }
    TapVector::new(out)
}

fn sample_link<R: Rng + ?Sized>(s: &LinkStatistics, rng: &mut R) -> Result<TapVector> {
    sample_tap_vector(s.taps, s.avg_power, s.los_fraction, rng)
}

/// Linear convolution of `u` and `v`, without padding.
pub fn convolve(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); u.len() + v.len() - 1];
    for (i, a) in u.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Cascaded channel through one element, zero-padded to `n` samples.
pub fn cascade(u: &TapVector, v: &TapVector, n: usize) -> Result<Vec<Complex64>> {
    let lr = u.len() + v.len() - 1;
    if lr > n {
        return Err(Error::LengthOverflow { taps: lr, len: n });
    }
    let mut out = convolve(u.taps(), v.taps());
    out.resize(n, Complex64::new(0.0, 0.0));
    Ok(out)
}

/// One draw of every link. The cascaded matrix `R` is stored column-wise,
/// keeping only the `L_r` leading taps of each column; all other entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    num_subcarriers: usize,
    direct: Vec<Complex64>,
    ap_ris: Vec<TapVector>,
    ris_ue: Vec<TapVector>,
    cascaded: Vec<Vec<Complex64>>,
    cascaded_taps: usize,
}

impl ChannelRealization {
    pub fn from_parts(
        num_subcarriers: usize,
        direct: TapVector,
        ap_ris: Vec<TapVector>,
        ris_ue: Vec<TapVector>,
    ) -> Result<Self> {
        if ap_ris.len() != ris_ue.len() {
            return Err(Error::DimensionMismatch {
                expected: ap_ris.len(),
                actual: ris_ue.len(),
            });
        }
        if ap_ris.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one RIS element required".into(),
            ));
        }
        let lu = ap_ris[0].len();
        let lv = ris_ue[0].len();
        for (u, v) in ap_ris.iter().zip(&ris_ue) {
            if u.len() != lu || v.len() != lv {
                return Err(Error::InvalidConfig(
                    "per-element tap counts must agree".into(),
                ));
            }
        }
        let lr = lu + lv - 1;
        if lr > num_subcarriers || direct.len() > num_subcarriers {
            return Err(Error::LengthOverflow {
                taps: lr.max(direct.len()),
                len: num_subcarriers,
            });
        }
        let cascaded = ap_ris
            .iter()
            .zip(&ris_ue)
            .map(|(u, v)| convolve(u.taps(), v.taps()))
            .collect();
        let mut d = direct.0;
        d.resize(num_subcarriers, Complex64::new(0.0, 0.0));
        Ok(Self {
            num_subcarriers,
            direct: d,
            ap_ris,
            ris_ue,
            cascaded,
            cascaded_taps: lr,
        })
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn num_elements(&self) -> usize {
        self.cascaded.len()
    }

    pub fn cascaded_taps(&self) -> usize {
        self.cascaded_taps
    }

    /// Zero-padded direct channel `d`.
    pub fn direct(&self) -> &[Complex64] {
        &self.direct
    }

    pub fn ap_ris(&self) -> &[TapVector] {
        &self.ap_ris
    }

    pub fn ris_ue(&self) -> &[TapVector] {
        &self.ris_ue
    }

    /// Leading `L_r` taps of `r_m`.
    pub fn cascaded_support(&self, m: usize) -> &[Complex64] {
        &self.cascaded[m]
    }

    /// Column `m` of `R`, zero-padded to `N`.
    pub fn cascaded_column(&self, m: usize) -> Vec<Complex64> {
        let mut c = self.cascaded[m].clone();
        c.resize(self.num_subcarriers, Complex64::new(0.0, 0.0));
        c
    }

    /// Composite channel `h = d + Rφ`, length `N`.
    pub fn composite(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.num_subcarriers];
        self.composite_into(phi, &mut h);
        h
    }

    pub fn composite_into(&self, phi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(phi.len(), self.num_elements(), "reflection vector length");
        assert_eq!(out.len(), self.num_subcarriers, "output length");
        out.copy_from_slice(&self.direct);
        let head = &mut out[..self.cascaded_taps];
        for (col, p) in self.cascaded.iter().zip(phi) {
            for (o, r) in head.iter_mut().zip(col) {
                *o += p * r;
            }
        }
    }

    /// Writes the realization as text; floats use round-trip formatting.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "ris-ofdm-channel 1").unwrap();
        let ld = self
            .direct
            .iter()
            .rposition(|t| *t != Complex64::new(0.0, 0.0))
            .map_or(1, |i| i + 1);
        writeln!(
            s,
            "n {} m {} ld {} lu {} lv {}",
            self.num_subcarriers,
            self.num_elements(),
            ld,
            self.ap_ris[0].len(),
            self.ris_ue[0].len()
        )
        .unwrap();
        let line = |s: &mut String, tag: &str, taps: &[Complex64]| {
            s.push_str(tag);
            for t in taps {
                write!(s, " {:?} {:?}", t.re, t.im).unwrap();
            }
            s.push('\n');
        };
        line(&mut s, "d", &self.direct[..ld]);
        for m in 0..self.num_elements() {
            line(&mut s, "u", self.ap_ris[m].taps());
            line(&mut s, "v", self.ris_ue[m].taps());
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::MalformedDump {
            line,
            reason: reason.to_string(),
        };
        let mut lines = r.lines().enumerate();
        let mut next = |want: &str| -> Result<(usize, Vec<String>)> {
            let (i, l) = lines
                .next()
                .ok_or_else(|| bad(0, "unexpected end of file"))?;
            let l = l?;
            let fields: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if fields.first().map(String::as_str) != Some(want) {
                return Err(bad(i + 1, &format!("expected `{want}` record")));
            }
            Ok((i + 1, fields))
        };
        let (ln, head) = next("ris-ofdm-channel")?;
        if head.get(1).map(String::as_str) != Some("1") {
            return Err(bad(ln, "unsupported version"));
        }
        let (ln, dims) = next("n")?;
        let num = |idx: usize| -> Result<usize> {
            dims.get(idx)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(ln, "bad dimension header"))
        };
        let (n, m, ld, lu, lv) = (num(1)?, num(3)?, num(5)?, num(7)?, num(9)?);
        let parse_taps = |ln: usize, fields: &[String], len: usize| -> Result<TapVector> {
            if fields.len() != 1 + 2 * len {
                return Err(bad(ln, "wrong tap count"));
            }
            let vals: Vec<f64> = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad(ln, "bad float")))
                .collect::<Result<_>>()?;
            TapVector::new(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
        };
        let (ln, f) = next("d")?;
        let direct = parse_taps(ln, &f, ld)?;
        let mut u = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, f) = next("u")?;
            u.push(parse_taps(ln, &f, lu)?);
            let (ln, f) = next("v")?;
            v.push(parse_taps(ln, &f, lv)?);
        }
        Self::from_parts(n, direct, u, v)
    }
}

/// Draws `d`, then `(u_m, v_m)` for each element in order.
pub fn sample_channel_realization<R: Rng + ?Sized>(
    stats: &LinkStatisticsSet,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let direct = sample_link(&stats.direct, rng)?;
    let m = cfg.num_elements;
    let mut u = Vec::with_capacity(m);
    let mut v = Vec::with_capacity(m);
    for _ in 0..m {
        u.push(sample_link(&stats.ap_ris, rng)?);
        v.push(sample_link(&stats.ris_ue, rng)?);
    }
    ChannelRealization::from_parts(cfg.num_subcarriers, direct, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::derive_link_statistics;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degenerate_rician_single_tap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let t = sample_tap_vector(1, 4.0, 1.0, &mut rng).unwrap();
            assert!((t.taps()[0].norm() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_los_zeroes_trailing_taps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = sample_tap_vector(5, 1.0, 1.0, &mut rng).unwrap();
        assert!(t.taps()[1..].iter().all(|x| *x == c(0.0, 0.0)));
    }

    #[test]
    fn nlos_on_single_tap_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_tap_vector(1, 1.0, 0.5, &mut rng),
            Err(Error::NlosWithoutTaps { .. })
        ));
    }

    #[test]
    fn tap_vector_mean_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 100_000;
        let total: f64 = (0..draws)
            .map(|_| {
                sample_tap_vector(3, 1.0, 1.0 / 3.0, &mut rng)
                    .unwrap()
                    .energy()
            })
            .sum();
        let mean = total / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean energy {mean}");
    }

    #[test]
    fn cascade_hand_cases() {
        let one = TapVector::new(vec![c(1.0, 0.0)]).unwrap();
        let abc = TapVector::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 7.0)]).unwrap();
        let out = cascade(&one, &abc, 6).unwrap();
        assert_eq!(&out[..3], abc.taps());
        assert!(out[3..].iter().all(|x| *x == c(0.0, 0.0)));

        let ones = TapVector::new(vec![c(1.0, 0.0); 2]).unwrap();
        let out = cascade(&ones, &ones, 4).unwrap();
        assert_eq!(
            out,
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn cascade_overflow() {
        let u = TapVector::new(vec![c(1.0, 0.0); 3]).unwrap();
        let v = TapVector::new(vec![c(1.0, 0.0); 3]).unwrap();
        assert!(matches!(
            cascade(&u, &v, 4),
            Err(Error::LengthOverflow { taps: 5, len: 4 })
        ));
    }

    #[test]
    fn cascade_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (lu, lv) in [(1, 5), (3, 4), (6, 2)] {
            let u =
                TapVector::new((0..lu).map(|_| complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
            let v =
                TapVector::new((0..lv).map(|_| complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
            let n = 16;
            let got = cascade(&u, &v, n).unwrap();
            for k in 0..n {
                let mut want = c(0.0, 0.0);
                for i in 0..lu {
                    for j in 0..lv {
                        if i + j == k {
                            want += u.taps()[i] * v.taps()[j];
                        }
                    }
                }
                assert!((got[k] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_element_unit_ap_ris_reproduces_ris_ue() {
        let v = TapVector::new(vec![c(0.3, -0.1), c(0.2, 0.2), c(-0.5, 0.0)]).unwrap();
        let d = TapVector::new(vec![c(1.0, 0.0)]).unwrap();
        let real = ChannelRealization::from_parts(
            8,
            d,
            vec![TapVector::new(vec![c(1.0, 0.0)]).unwrap()],
            vec![v.clone()],
        )
        .unwrap();
        let col = real.cascaded_column(0);
        assert_eq!(&col[..3], v.taps());
        assert!(col[3..].iter().all(|x| *x == c(0.0, 0.0)));
    }

    #[test]
    fn realization_structure() {
        let cfg = SystemConfig::default();
        let stats = derive_link_statistics(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let real = sample_channel_realization(&stats, &cfg, &mut rng).unwrap();
        assert_eq!(real.num_elements(), cfg.num_elements);
        assert_eq!(real.direct().len(), cfg.num_subcarriers);
        assert!(real.direct()[cfg.taps_direct..]
            .iter()
            .all(|x| x.norm() == 0.0));
        for m in 0..cfg.num_elements {
            let col = real.cascaded_column(m);
            assert_eq!(col.len(), cfg.num_subcarriers);
            assert!(col.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
            assert!(col[cfg.cascaded_taps()..].iter().all(|x| x.norm() == 0.0));
        }
    }

    #[test]
    fn composite_matches_dense_product() {
        let cfg = SystemConfig {
            num_elements: 7,
            ..SystemConfig::default()
        };
        let stats = derive_link_statistics(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let real = sample_channel_realization(&stats, &cfg, &mut rng).unwrap();
        let phi: Vec<_> = (0..7).map(|_| unit_phasor(&mut rng)).collect();
        let h = real.composite(&phi);
        for n in 0..cfg.num_subcarriers {
            let mut want = real.direct()[n];
            for (m, p) in phi.iter().enumerate() {
                want += real.cascaded_column(m)[n] * p;
            }
            assert!((h[n] - want).norm() <= 1e-12 * want.norm().max(1e-30));
        }
        assert!(h[cfg.cascaded_taps()..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn dump_round_trip_is_exact() {
        let cfg = SystemConfig {
            num_elements: 5,
            ..SystemConfig::default()
        };
        let stats = derive_link_statistics(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let real = sample_channel_realization(&stats, &cfg, &mut rng).unwrap();
        let mut buf = Vec::new();
        real.write_dump(&mut buf).unwrap();
        let back = ChannelRealization::read_dump(buf.as_slice()).unwrap();
        assert_eq!(real, back);
    }

    #[test]
    fn malformed_dump_reports_line() {
        let text = "ris-ofdm-channel 1\nn 8 m 1 ld 1 lu 1 lv 1\nd 1.0\n";
        match ChannelRealization::read_dump(text.as_bytes()) {
            Err(Error::MalformedDump { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
