//! Field-sample persistence: flat binary and CSV.
//!
//! Binary layout (little endian):
//! magic `GFFS` | version u32 | d u32 | n u64 | sampler u32 | master_seed
//! u64 | replica u64 | n f64 values. The region geometry itself is not
//! stored; the CSV form carries the points.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gff::cov::{FieldSample, Provenance, SamplerKind};
use crate::lattice::Region;

const MAGIC: &[u8; 4] = b"GFFS";
const VERSION: u32 = 1;

fn sampler_code(s: SamplerKind) -> u32 {
    match s {
        SamplerKind::Dense => 0,
        SamplerKind::Sequential => 1,
        SamplerKind::BoxMarkov => 2,
    }
}

fn sampler_from_code(c: u32) -> Result<SamplerKind> {
    match c {
        0 => Ok(SamplerKind::Dense),
        1 => Ok(SamplerKind::Sequential),
        2 => Ok(SamplerKind::BoxMarkov),
        _ => Err(Error::InvalidArgument(format!("unknown sampler code {c}"))),
    }
}

pub fn write_sample_binary<W: Write>(w: &mut W, sample: &FieldSample) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(sample.region.dim() as u32).to_le_bytes())?;
    w.write_all(&(sample.values.len() as u64).to_le_bytes())?;
    w.write_all(&sampler_code(sample.provenance.sampler).to_le_bytes())?;
    w.write_all(&sample.provenance.master_seed.to_le_bytes())?;
    w.write_all(&sample.provenance.replica.to_le_bytes())?;
    for v in &sample.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a sample written by [`write_sample_binary`]; the region is supplied
/// by the caller and validated against the header.
pub fn read_sample_binary<R: Read>(r: &mut R, region: &Region) -> Result<FieldSample> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::InvalidArgument(format!("unknown version {version}")));
    }
    let d = read_u32(r)? as usize;
    let n = read_u64(r)? as usize;
    if d != region.dim() || n != region.len() {
        return Err(Error::DimensionMismatch {
            left: region.len(),
            right: n,
        });
    }
    let sampler = sampler_from_code(read_u32(r)?)?;
    let master_seed = read_u64(r)?;
    let replica = read_u64(r)?;
    let mut values = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok(FieldSample {
        region: Arc::new(region.clone()),
        values,
        provenance: Provenance {
            sampler,
            master_seed,
            replica,
        },
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// CSV with header `point,value`; points are space-separated coordinates so
/// no field needs quoting. Lines end CRLF.
pub fn write_sample_csv<W: Write>(w: &mut W, sample: &FieldSample) -> Result<()> {
    write!(w, "point,value\r\n")?;
    for (p, v) in sample.region.iter().zip(&sample.values) {
        let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        write!(w, "{},{}\r\n", coords.join(" "), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::cov::CovarianceModel;
    use crate::lattice::{ball, LatticePoint, Norm};
    use crate::potential::GreenEvaluator;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let model = CovarianceModel::build(&eval, &region, 100).unwrap();
        let sample = model.sample_one(42, 3);
        let mut buf = Vec::new();
        write_sample_binary(&mut buf, &sample).unwrap();
        let got = read_sample_binary(&mut buf.as_slice(), &region).unwrap();
        assert_eq!(got.values, sample.values);
        assert_eq!(got.provenance, sample.provenance);

        // identical provenance => identical bytes
        let mut buf2 = Vec::new();
        write_sample_binary(&mut buf2, &model.sample_one(42, 3)).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let model = CovarianceModel::build(&eval, &region, 100).unwrap();
        let sample = model.sample_one(1, 0);
        let mut buf = Vec::new();
        write_sample_csv(&mut buf, &sample).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines[0], "point,value");
        assert_eq!(lines.len(), region.len() + 1);
        assert!(lines[1].contains('.'));
    }
}
