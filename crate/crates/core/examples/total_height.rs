//! Total height of a motive read from a TOML document, with the `d = 1`
//! term reduced to `d = 2`.

use heightlab::document::Document;
use heightlab::hodge::HodgeContext;
use heightlab::motives::{total_height, TotalOptions};

fn main() -> Result<(), heightlab::HeightError> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/extension_d1.toml").into());
    let m = Document::load(path.as_ref())?.motive()?;
    println!("type {:?}", m.type_signature());
    let rep = total_height(&m, &TotalOptions::default(), &HodgeContext::default())?;
    for r in &rep.per_wd {
        println!("h_({}, {}) = {}{}", r.w, r.d, r.value, r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default());
    }
    for p in &rep.per_place {
        println!("  {:<5} (w {}, d {})  {}", p.place, p.w, p.d, p.value);
    }
    println!("total {}", rep.total);
    Ok(())
}
