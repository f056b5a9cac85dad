//! Model checkpoints.
//!
//! Layout, integers little-endian:
//!
//! ```text
//! "NCMN"  u8 version=1
//! u8 kind (0 fat_shallow, 1 deep_thin, 2 cascade, 3 custom)
//! u8 activation (0 sigmoid, 1 tanh, 2 relu)
//! u8 cascade_skip
//! u32 input_width  u32 output_bit_count  u32 hidden_count  u32 × hidden_count sizes
//! u64 parameter_seed
//! f32 parameters: per hidden layer weights (row-major, fan_in × width) then
//! bias, then head weights (fan_in × 2n) then head bias
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use super::{Activation, ArchKind, ArchitectureSpec, MimicNetwork, Parameters};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"NCMN";
const VERSION: u8 = 1;

pub fn write_checkpoint<W: Write>(net: &MimicNetwork<f32>, w: &mut W) -> Result<()> {
    let spec = net.spec();
    let u32_of = |v: usize| {
        u32::try_from(v).map_err(|_| Error::Config(format!("{v} does not fit the checkpoint")))
    };
    w.write_all(MAGIC)?;
    w.write_all(&[
        VERSION,
        spec.kind.code(),
        spec.activation.code(),
        spec.cascade_skip as u8,
    ])?;
    w.write_all(&u32_of(spec.input_width)?.to_le_bytes())?;
    w.write_all(&u32_of(spec.output_bit_count)?.to_le_bytes())?;
    w.write_all(&u32_of(spec.hidden_sizes.len())?.to_le_bytes())?;
    for &h in &spec.hidden_sizes {
        w.write_all(&u32_of(h)?.to_le_bytes())?;
    }
    w.write_all(&net.parameter_seed().to_le_bytes())?;
    for slice in net.params().slices() {
        for v in slice {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Truncated("checkpoint ends early".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<MimicNetwork<f32>> {
    let head: [u8; 8] = take(r)?;
    if &head[..4] != MAGIC {
        return Err(Error::Header(format!("bad checkpoint magic {:?}", &head[..4])));
    }
    if head[4] != VERSION {
        return Err(Error::Header(format!("unsupported checkpoint version {}", head[4])));
    }
    let kind = ArchKind::from_code(head[5])
        .ok_or_else(|| Error::Header(format!("unknown architecture code {}", head[5])))?;
    let activation = Activation::from_code(head[6])
        .ok_or_else(|| Error::Header(format!("unknown activation code {}", head[6])))?;
    let cascade_skip = match head[7] {
        0 => false,
        1 => true,
        other => return Err(Error::Header(format!("bad cascade flag {other}"))),
    };
    let word = |r: &mut R| -> Result<usize> { Ok(u32::from_le_bytes(take(r)?) as usize) };
    let input_width = word(r)?;
    let output_bit_count = word(r)?;
    let depth = word(r)?;
    if depth > 1024 {
        return Err(Error::Header(format!("implausible depth {depth}")));
    }
    let hidden_sizes = (0..depth).map(|_| word(r)).collect::<Result<Vec<_>>>()?;
    let seed = u64::from_le_bytes(take(r)?);
    let spec = ArchitectureSpec {
        kind,
        input_width,
        output_bit_count,
        hidden_sizes,
        activation,
        cascade_skip,
    };
    spec.validate()
        .map_err(|e| Error::Header(format!("checkpoint architecture: {e}")))?;

    let mut params = Parameters::<f32>::zeros_like(&spec);
    for slice in params.slices_mut() {
        for v in slice.iter_mut() {
            *v = f32::from_le_bytes(take(r)?);
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after checkpoint".into()));
    }
    MimicNetwork::from_parts(spec, params, seed)
}

pub fn save_checkpoint(net: &MimicNetwork<f32>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<MimicNetwork<f32>> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        for kind in ArchKind::STANDARD {
            let spec = ArchitectureSpec::new(kind, 16, 3, Activation::Tanh);
            let net = MimicNetwork::<f32>::build(&spec, 77).unwrap();
            let mut buf = Vec::new();
            write_checkpoint(&net, &mut buf).unwrap();
            let back = read_checkpoint(&mut &buf[..]).unwrap();
            assert_eq!(back, net);
            let bits = |n: &MimicNetwork<f32>| -> Vec<u32> {
                n.params().slices().concat().iter().map(|v| v.to_bits()).collect()
            };
            assert_eq!(bits(&back), bits(&net));
        }
    }

    #[test]
    fn header_bytes() {
        let spec = ArchitectureSpec::custom(2, 1, vec![3], Activation::Relu, true);
        let net = MimicNetwork::<f32>::build(&spec, 0x0102).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"NCMN\x01\x03\x02\x01");
        assert_eq!(&buf[8..20], &[2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&buf[20..24], &[3, 0, 0, 0]);
        assert_eq!(&buf[24..32], &0x0102u64.to_le_bytes());
        assert_eq!(buf.len(), 32 + 4 * spec.parameter_count());
    }

    #[test]
    fn corrupt_checkpoints() {
        let spec = ArchitectureSpec::custom(2, 1, vec![3], Activation::Relu, false);
        let net = MimicNetwork::<f32>::build(&spec, 1).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[1] = b'X';
        assert!(matches!(read_checkpoint(&mut &bad[..]), Err(Error::Header(_))));
        assert!(matches!(
            read_checkpoint(&mut &buf[..buf.len() - 2]),
            Err(Error::Truncated(_))
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(read_checkpoint(&mut &long[..]).is_err());
    }
}
