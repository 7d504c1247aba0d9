use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Critic, DiscriminatorSpec, Generator, GeneratorSpec};
use crate::error::{Error, Result};
use crate::nn::{Adam, Module, Param};

const MAGIC: &[u8; 4] = b"DFCK";
const VERSION: u16 = 1;
const KIND: &str = "checkpoint";

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AdamMeta {
    beta1: f32,
    beta2: f32,
    eps: f32,
    t: u64,
}

impl From<&Adam> for AdamMeta {
    fn from(a: &Adam) -> Self {
        AdamMeta {
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            t: a.t,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Manifest {
    generator: GeneratorSpec,
    discriminator: DiscriminatorSpec,
    gen_opt: AdamMeta,
    critic_opt: AdamMeta,
}

/// Networks, optimizer state and training position.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub generator: Generator,
    pub critic: Critic,
    pub gen_opt: Adam,
    pub critic_opt: Adam,
    pub epoch: u64,
    pub step: u64,
    pub seed: u64,
}

fn write_block(w: &mut impl Write, name: &str, shape: &[usize], data: &[f32]) -> Result<()> {
    w.write_all(&(name.len() as u16).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    w.write_all(&[shape.len() as u8])?;
    for &d in shape {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_exact<const K: usize>(r: &mut impl Read, what: &str) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)
        .map_err(|_| Error::corrupt(KIND, format!("truncated {what}")))?;
    Ok(b)
}

fn read_block(r: &mut impl Read) -> Result<(String, Vec<usize>, Vec<f32>)> {
    let len = u16::from_le_bytes(read_exact(r, "block name")?) as usize;
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)
        .map_err(|_| Error::corrupt(KIND, "truncated block name"))?;
    let name = String::from_utf8(name).map_err(|_| Error::corrupt(KIND, "block name not UTF-8"))?;
    let ndim = read_exact::<1>(r, "block rank")?[0] as usize;
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        shape.push(u32::from_le_bytes(read_exact(r, "block shape")?) as usize);
    }
    let n: usize = shape.iter().product();
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::corrupt(KIND, format!("truncated data for {name}")))?;
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok((name, shape, data))
}

fn adam_blocks<'a>(prefix: &str, opt: &'a Adam, params: &[&Param]) -> Vec<(String, Vec<usize>, &'a [f32])> {
    let mut out = Vec::new();
    if opt.m.is_empty() {
        return out;
    }
    for ((p, m), v) in params.iter().zip(&opt.m).zip(&opt.v) {
        out.push((format!("{prefix}.m/{}", p.name), p.shape.clone(), m.as_slice()));
        out.push((format!("{prefix}.v/{}", p.name), p.shape.clone(), v.as_slice()));
    }
    out
}

impl Checkpoint {
    pub fn new(generator: Generator, critic: Critic, gen_opt: Adam, critic_opt: Adam, seed: u64) -> Self {
        Checkpoint {
            generator,
            critic,
            gen_opt,
            critic_opt,
            epoch: 0,
            step: 0,
            seed,
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let manifest = Manifest {
            generator: self.generator.spec().clone(),
            discriminator: self.critic.spec().clone(),
            gen_opt: (&self.gen_opt).into(),
            critic_opt: (&self.critic_opt).into(),
        };
        let text = serde_json::to_vec(&manifest)?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&manifest.generator.hash().to_le_bytes())?;
        w.write_all(&manifest.discriminator.hash().to_le_bytes())?;
        for v in [self.epoch, self.step, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(text.len() as u32).to_le_bytes())?;
        w.write_all(&text)?;

        let gp = self.generator.params();
        let cp = self.critic.params();
        let mut blocks: Vec<(String, Vec<usize>, &[f32])> = gp
            .iter()
            .chain(&cp)
            .map(|p| (p.name.clone(), p.shape.clone(), p.value.as_slice()))
            .collect();
        blocks.extend(adam_blocks("adam.gen", &self.gen_opt, &gp));
        blocks.extend(adam_blocks("adam.critic", &self.critic_opt, &cp));
        w.write_all(&(blocks.len() as u32).to_le_bytes())?;
        for (name, shape, data) in blocks {
            write_block(w, &name, &shape, data)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        if &read_exact::<4>(r, "magic")? != MAGIC {
            return Err(Error::corrupt(KIND, "bad magic"));
        }
        let version = u16::from_le_bytes(read_exact(r, "version")?);
        if version != VERSION {
            return Err(Error::corrupt(KIND, format!("unsupported version {version}")));
        }
        let gen_hash = u64::from_le_bytes(read_exact(r, "header")?);
        let critic_hash = u64::from_le_bytes(read_exact(r, "header")?);
        let epoch = u64::from_le_bytes(read_exact(r, "header")?);
        let step = u64::from_le_bytes(read_exact(r, "header")?);
        let seed = u64::from_le_bytes(read_exact(r, "header")?);
        let len = u32::from_le_bytes(read_exact(r, "manifest length")?) as usize;
        let mut text = vec![0u8; len];
        r.read_exact(&mut text)
            .map_err(|_| Error::corrupt(KIND, "truncated manifest"))?;
        let manifest: Manifest =
            serde_json::from_slice(&text).map_err(|e| Error::corrupt(KIND, format!("manifest: {e}")))?;
        if manifest.generator.hash() != gen_hash {
            return Err(Error::SpecHashMismatch {
                file: gen_hash,
                expected: manifest.generator.hash(),
            });
        }
        if manifest.discriminator.hash() != critic_hash {
            return Err(Error::SpecHashMismatch {
                file: critic_hash,
                expected: manifest.discriminator.hash(),
            });
        }

        let count = u32::from_le_bytes(read_exact(r, "block count")?) as usize;
        let mut blocks = HashMap::with_capacity(count);
        for _ in 0..count {
            let (name, shape, data) = read_block(r)?;
            blocks.insert(name, (shape, data));
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::corrupt(KIND, "trailing bytes"));
        }

        let mut generator = Generator::new(manifest.generator, 0)?;
        let mut critic = Critic::new(manifest.discriminator, 0)?;
        let mut take = |name: &str, shape: &[usize]| -> Result<Vec<f32>> {
            let (s, d) = blocks
                .remove(name)
                .ok_or_else(|| Error::corrupt(KIND, format!("missing block {name}")))?;
            if s != shape {
                return Err(Error::corrupt(KIND, format!("block {name} has shape {s:?}, expected {shape:?}")));
            }
            Ok(d)
        };
        let mut restore = |prefix: &str, params: Vec<&mut Param>, meta: &AdamMeta| -> Result<Adam> {
            let mut opt = Adam::new(meta.beta1, meta.beta2, meta.eps);
            opt.t = meta.t;
            let mut has_state = true;
            for p in params {
                p.value = take(&p.name, &p.shape)?;
                if meta.t > 0 {
                    opt.m.push(take(&format!("{prefix}.m/{}", p.name), &p.shape)?);
                    opt.v.push(take(&format!("{prefix}.v/{}", p.name), &p.shape)?);
                } else {
                    has_state = false;
                }
            }
            if !has_state {
                opt.m.clear();
                opt.v.clear();
            }
            Ok(opt)
        };
        let gen_opt = restore("adam.gen", generator.params_mut(), &manifest.gen_opt)?;
        let critic_opt = restore("adam.critic", critic.params_mut(), &manifest.critic_opt)?;
        if let Some(name) = blocks.keys().next() {
            return Err(Error::corrupt(KIND, format!("unexpected block {name}")));
        }
        Ok(Checkpoint {
            generator,
            critic,
            gen_opt,
            critic_opt,
            epoch,
            step,
            seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Checkpoint::read_from(&mut BufReader::new(File::open(path)?))
    }

    /// Loads and rejects the file unless both specs hash to the expected ones.
    pub fn load_expecting(
        path: impl AsRef<Path>,
        generator: &GeneratorSpec,
        critic: &DiscriminatorSpec,
    ) -> Result<Self> {
        let ck = Checkpoint::load(path)?;
        ck.ensure_specs(generator, critic)?;
        Ok(ck)
    }

    pub fn ensure_specs(&self, generator: &GeneratorSpec, critic: &DiscriminatorSpec) -> Result<()> {
        let pairs = [
            (self.generator.spec().hash(), generator.hash()),
            (self.critic.spec().hash(), critic.hash()),
        ];
        for (file, expected) in pairs {
            if file != expected {
                return Err(Error::SpecHashMismatch { file, expected });
            }
        }
        Ok(())
    }
}
