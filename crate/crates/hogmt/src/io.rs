//! Binary containers and CSV export.
//!
//! One container family, little-endian throughout:
//!
//! * `HGMT` — a channel realization stored as its 4-D kernel. Header: magic
//!   `HGMT`, version u16, then U, T, L_max as u32. Payload: row-major
//!   (u, t, u', t') complex values, each an (re, im) pair of f64.
//! * `HGES` — an eigensystem. Header: magic `HGES`, version u16, U, T,
//!   n_triples as u32. Payload per triple: sigma as f64, then the psi and
//!   phi grids, each U*T row-major complex pairs.
//! * `HGSG` — a symbol grid. Header: magic `HGSG`, version u16, U, T as
//!   u32. Payload: U*T row-major complex pairs.
//!
//! The lossy CSV export of a kernel has header `u,t,u_prime,t_prime,re,im`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array4};
use num_complex::Complex64;

use crate::channel::Kernel4D;
use crate::decompose::{EigenSystem, EigenTriple};
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;

pub const CONTAINER_VERSION: u16 = 1;

fn write_header(w: &mut impl Write, magic: &[u8; 4], dims: &[u32]) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&CONTAINER_VERSION.to_le_bytes())?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 4], n_dims: usize) -> Result<Vec<u32>> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::BadContainer(format!(
            "magic mismatch: expected {:?}, got {:?}",
            std::str::from_utf8(magic).unwrap_or("?"),
            String::from_utf8_lossy(&got)
        )));
    }
    let mut vbuf = [0u8; 2];
    r.read_exact(&mut vbuf)?;
    let version = u16::from_le_bytes(vbuf);
    if version != CONTAINER_VERSION {
        return Err(Error::BadContainer(format!(
            "unsupported container version {version}"
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        let mut dbuf = [0u8; 4];
        r.read_exact(&mut dbuf)?;
        dims.push(u32::from_le_bytes(dbuf));
    }
    Ok(dims)
}

fn write_complex_slice(w: &mut impl Write, data: impl Iterator<Item = Complex64>) -> Result<()> {
    for z in data {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_complex_vec(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
            )
        })
        .collect())
}

pub fn write_kernel(path: &Path, k: &Kernel4D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let l_max = k.memory.unwrap_or(0) as u32;
    write_header(
        &mut w,
        b"HGMT",
        &[k.num_users as u32, k.num_time as u32, l_max],
    )?;
    write_complex_slice(&mut w, k.values.iter().cloned())?;
    w.flush()?;
    Ok(())
}

pub fn read_kernel(path: &Path) -> Result<Kernel4D> {
    let mut r = BufReader::new(File::open(path)?);
    let dims = read_header(&mut r, b"HGMT", 3)?;
    let (num_u, num_t, l_max) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let data = read_complex_vec(&mut r, num_u * num_t * num_u * num_t)?;
    let values = Array4::from_shape_vec((num_u, num_t, num_u, num_t), data)
        .map_err(|e| Error::BadContainer(format!("kernel payload shape: {e}")))?;
    Ok(Kernel4D {
        values,
        num_users: num_u,
        num_time: num_t,
        memory: if l_max == 0 { None } else { Some(l_max) },
    })
}

pub fn write_eigensystem(path: &Path, es: &EigenSystem) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(
        &mut w,
        b"HGES",
        &[
            es.num_users as u32,
            es.num_time as u32,
            es.triples.len() as u32,
        ],
    )?;
    for t in &es.triples {
        w.write_all(&t.sigma.to_le_bytes())?;
        write_complex_slice(&mut w, t.psi.iter().cloned())?;
        write_complex_slice(&mut w, t.phi.iter().cloned())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_eigensystem(path: &Path) -> Result<EigenSystem> {
    let mut r = BufReader::new(File::open(path)?);
    let dims = read_header(&mut r, b"HGES", 3)?;
    let (num_u, num_t, n) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let grid = num_u * num_t;
    let mut triples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut sbuf = [0u8; 8];
        r.read_exact(&mut sbuf)?;
        let sigma = f64::from_le_bytes(sbuf);
        let psi = Array2::from_shape_vec((num_u, num_t), read_complex_vec(&mut r, grid)?)
            .map_err(|e| Error::BadContainer(format!("psi shape: {e}")))?;
        let phi = Array2::from_shape_vec((num_u, num_t), read_complex_vec(&mut r, grid)?)
            .map_err(|e| Error::BadContainer(format!("phi shape: {e}")))?;
        triples.push(EigenTriple { sigma, psi, phi });
    }
    Ok(EigenSystem {
        triples,
        num_users: num_u,
        num_time: num_t,
    })
}

pub fn write_symbol_grid(path: &Path, g: &SymbolGrid) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(
        &mut w,
        b"HGSG",
        &[g.num_users() as u32, g.num_time() as u32],
    )?;
    write_complex_slice(&mut w, g.values.iter().cloned())?;
    w.flush()?;
    Ok(())
}

pub fn read_symbol_grid(path: &Path) -> Result<SymbolGrid> {
    let mut r = BufReader::new(File::open(path)?);
    let dims = read_header(&mut r, b"HGSG", 2)?;
    let (num_u, num_t) = (dims[0] as usize, dims[1] as usize);
    let values = Array2::from_shape_vec((num_u, num_t), read_complex_vec(&mut r, num_u * num_t)?)
        .map_err(|e| Error::BadContainer(format!("grid shape: {e}")))?;
    Ok(SymbolGrid::new(values))
}

/// Lossy CSV inspection dump of a kernel.
pub fn export_kernel_csv(path: &Path, k: &Kernel4D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "u,t,u_prime,t_prime,re,im")?;
    for u in 0..k.num_users {
        for t in 0..k.num_time {
            for up in 0..k.num_users {
                for tp in 0..k.num_time {
                    let z = k.values[[u, t, up, tp]];
                    writeln!(w, "{u},{t},{up},{tp},{},{}", z.re, z.im)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{impulse_to_kernel, synth_channel, ChannelConfig};
    use crate::decompose::hogmt_decompose;
    use crate::grid::FlatteningMap;

    fn sample_kernel() -> Kernel4D {
        let cfg = ChannelConfig {
            num_users: 2,
            num_time: 6,
            tap_count_min: 1,
            tap_count_max: 3,
            gain_mean_profile: vec![0.5; 6],
            gain_std_profile: vec![0.4; 6],
            cross_user_coupling: 0.7,
            seed: 99,
        };
        impulse_to_kernel(&synth_channel(&cfg).unwrap())
    }

    #[test]
    fn kernel_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.hgmt");
        let k = sample_kernel();
        write_kernel(&path, &k).unwrap();
        let back = read_kernel(&path).unwrap();
        assert_eq!(k.values, back.values);
        assert_eq!(back.memory, Some(3));
    }

    #[test]
    fn eigensystem_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.hges");
        let k = sample_kernel();
        let es = hogmt_decompose(&k, &FlatteningMap::user_major(2, 6)).unwrap();
        write_eigensystem(&path, &es).unwrap();
        let back = read_eigensystem(&path).unwrap();
        assert_eq!(es.triples.len(), back.triples.len());
        for (a, b) in es.triples.iter().zip(back.triples.iter()) {
            assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
            assert_eq!(a.psi, b.psi);
            assert_eq!(a.phi, b.phi);
        }
    }

    #[test]
    fn symbol_grid_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.hgsg");
        let mut g = SymbolGrid::zeros(3, 4);
        let mut v = 0.1;
        for z in g.values.iter_mut() {
            *z = Complex64::new(v, -v * 2.0);
            v += 0.7;
        }
        write_symbol_grid(&path, &g).unwrap();
        assert_eq!(read_symbol_grid(&path).unwrap().values, g.values);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.hgmt");
        write_symbol_grid(&path, &SymbolGrid::zeros(2, 2)).unwrap();
        match read_kernel(&path) {
            Err(Error::BadContainer(msg)) => assert!(msg.contains("magic")),
            other => panic!("expected BadContainer, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.hgmt");
        let k = sample_kernel();
        write_kernel(&path, &k).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(read_kernel(&path).is_err());
    }

    #[test]
    fn kernel_csv_has_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        let k = sample_kernel();
        export_kernel_csv(&path, &k).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "u,t,u_prime,t_prime,re,im");
        assert_eq!(text.lines().count(), 1 + 2 * 6 * 2 * 6);
    }
}
