//! Writing and parsing instance documents, and the three error classes.

use mvb::corpus::uniform_twisted;
use mvb::format::{self, Document};

fn main() -> mvb::Result<()> {
    let a = uniform_twisted(13, 2, 1, 2, 1);
    let text = format::write_instance(&a);
    match format::parse(text.as_bytes())? {
        Document::Instance(b) => println!("round trip equal: {}", a == b),
        _ => unreachable!(),
    }
    let truncated = &text.as_bytes()[..text.len() / 2];
    println!("{}", format::parse(truncated).unwrap_err());
    let renamed = text.replacen("\"format_version\"", "\"version\"", 1);
    println!("{}", format::parse(renamed.as_bytes()).unwrap_err());
    Ok(())
}
