//! Writes a motive to the TOML document format and reads it back.

use heightlab::document::Document;
use heightlab::motives::{kummer_motive, same_realizations};
use heightlab::qlinalg::Q;

fn main() -> Result<(), heightlab::HeightError> {
    let m = kummer_motive(&Q::new(12.into(), 5.into()))?;
    let text = Document::from_motive(&m, 40).to_toml();
    println!("{text}");
    let back = Document::parse(&text)?.motive()?;
    println!("round trip preserves the realizations: {}", same_realizations(&m, &back));
    Ok(())
}
