//! An atlas with block-diagonal changes of charts.

use mvb::corpus::uniform_twisted;
use mvb::split::{self, Options};

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(9, 3, 1, 3, 2);
    let s = split::decompose(&a, Options::default())?;
    let normal = split::normalize_atlas(&a, &s)?;
    let diagonal = normal.transitions().values().all(|t| t.is_block_diagonal());
    println!("original block diagonal: {}", a.transitions().values().all(|t| t.is_block_diagonal()));
    println!("normalized block diagonal: {diagonal}, valid: {}", normal.validate().is_valid());
    Ok(())
}
