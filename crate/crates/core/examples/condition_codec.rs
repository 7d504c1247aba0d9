//! Every (force, location, material) condition with its one-hot vector and
//! the block masks handed to the critic.
//!
//! `cargo run --example condition_codec`

use defonet::condition::{decode_vector, encode_block_masks, encode_vector, Condition, CONDITION_DIM};

fn main() -> defonet::Result<()> {
    for c in Condition::all() {
        let v = encode_vector(&c)?;
        let bits: String = v.iter().map(|&b| if b == 1.0 { '1' } else { '0' }).collect();
        assert_eq!(decode_vector(&v)?, c);
        let masks = encode_block_masks(&c, 4)?;
        let lit: Vec<usize> = (0..CONDITION_DIM).filter(|&i| masks.channel(i)[0] == 1.0).collect();
        println!(
            "force {} loc {} material {}  {}|{}|{}  mask channels {:?}",
            c.force_bin,
            c.location_bin,
            c.material_bin,
            &bits[..2],
            &bits[2..9],
            &bits[9..],
            lit
        );
    }
    Ok(())
}
